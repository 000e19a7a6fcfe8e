/// @file smallmath.hpp
/// @brief Fixed-size vector/matrix helpers used throughout the library.
///
/// Matrices here are tiny (3 rows, at most 6 columns) and their entries are
/// either doubles or second-order jets, so everything is written as plain
/// loops over std::array storage instead of pulling in a linear-algebra
/// dependency with custom-scalar plumbing.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace lagrflow {

template <class T> using Vec3T = std::array<T, 3>;
using Vec3 = Vec3T<double>;

/// 3 x m matrix stored as m column 3-vectors (m <= 6; `cols` gives the
/// active count).
template <class T> struct Mat3x {
  int cols = 0;
  std::array<Vec3T<T>, 6> col{};

  Vec3T<T>& operator[](int j) { return col[static_cast<std::size_t>(j)]; }
  const Vec3T<T>& operator[](int j) const {
    return col[static_cast<std::size_t>(j)];
  }
};
using Mat3 = Mat3x<double>;

template <class T> Vec3T<T> operator+(const Vec3T<T>& a, const Vec3T<T>& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
template <class T> Vec3T<T> operator-(const Vec3T<T>& a, const Vec3T<T>& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
template <class T, class S> Vec3T<T> operator*(const S& s, const Vec3T<T>& a) {
  return {s * a[0], s * a[1], s * a[2]};
}

template <class T> T dot(const Vec3T<T>& a, const Vec3T<T>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class T> Vec3T<T> cross(const Vec3T<T>& a, const Vec3T<T>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

/// Determinant of the 3x3 matrix with columns c0, c1, c2.
template <class T>
T det3(const Vec3T<T>& c0, const Vec3T<T>& c1, const Vec3T<T>& c2) {
  return dot(c0, cross(c1, c2));
}

inline double norm3(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline double max_abs3(const Vec3& a) {
  return std::max({std::fabs(a[0]), std::fabs(a[1]), std::fabs(a[2])});
}

/// Determinant of an n x n matrix (n <= 6), Gaussian elimination with
/// partial pivoting.  Used for the five-column wedge identities.
template <int N> double detN(std::array<std::array<double, N>, N> m) {
  double det = 1.0;
  for (int k = 0; k < N; ++k) {
    int piv = k;
    for (int r = k + 1; r < N; ++r)
      if (std::fabs(m[r][k]) > std::fabs(m[piv][k])) piv = r;
    if (m[piv][k] == 0.0) return 0.0;
    if (piv != k) {
      std::swap(m[piv], m[k]);
      det = -det;
    }
    det *= m[k][k];
    for (int r = k + 1; r < N; ++r) {
      const double f = m[r][k] / m[k][k];
      for (int c = k; c < N; ++c) m[r][c] -= f * m[k][c];
    }
  }
  return det;
}

/// Solve the 3x3 system M x = b (columns of M given); plain Cramer rule.
inline Vec3 solve3(const Vec3& c0, const Vec3& c1, const Vec3& c2,
                   const Vec3& b) {
  const double d = det3(c0, c1, c2);
  return {det3(b, c1, c2) / d, det3(c0, b, c2) / d, det3(c0, c1, b) / d};
}

}  // namespace lagrflow
