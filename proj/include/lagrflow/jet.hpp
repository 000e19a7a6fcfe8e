/// @file jet.hpp
/// @brief Second-order jets: value plus first and second time derivatives.
///
/// A Jet2 carries (v, v', v'') through arithmetic and elementary functions,
/// which is how the library obtains exact A'(t) and A''(t) entries without
/// symbolic differentiation of matrix assemblies.  When only the first
/// derivative of an input is known, pass anything for d2 and ignore d2 in the
/// result; the d1 slot of the output never depends on input d2 slots.
#pragma once

#include <cmath>

namespace lagrflow {

struct Jet2 {
  double v = 0.0;   ///< value
  double d1 = 0.0;  ///< first derivative
  double d2 = 0.0;  ///< second derivative

  constexpr Jet2() = default;
  constexpr Jet2(double value) : v(value) {}
  constexpr Jet2(double value, double first, double second)
      : v(value), d1(first), d2(second) {}

  /// Jet of the independent variable t itself.
  static constexpr Jet2 variable(double t) { return {t, 1.0, 0.0}; }
};

constexpr Jet2 operator+(const Jet2& a, const Jet2& b) {
  return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2};
}
constexpr Jet2 operator-(const Jet2& a, const Jet2& b) {
  return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2};
}
constexpr Jet2 operator-(const Jet2& a) { return {-a.v, -a.d1, -a.d2}; }
constexpr Jet2 operator*(const Jet2& a, const Jet2& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1,
          a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}
inline Jet2 operator/(const Jet2& a, const Jet2& b) {
  const double q = a.v / b.v;
  const double q1 = (a.d1 - q * b.d1) / b.v;
  const double q2 = (a.d2 - 2.0 * q1 * b.d1 - q * b.d2) / b.v;
  return {q, q1, q2};
}

inline Jet2& operator+=(Jet2& a, const Jet2& b) { return a = a + b; }
inline Jet2& operator-=(Jet2& a, const Jet2& b) { return a = a - b; }
inline Jet2& operator*=(Jet2& a, const Jet2& b) { return a = a * b; }

/// Chain rule for a univariate function with derivatives f', f'' at u.v.
inline Jet2 chain(const Jet2& u, double f, double fp, double fpp) {
  return {f, fp * u.d1, fpp * u.d1 * u.d1 + fp * u.d2};
}

inline Jet2 sin(const Jet2& u) {
  const double s = std::sin(u.v), c = std::cos(u.v);
  return chain(u, s, c, -s);
}
inline Jet2 cos(const Jet2& u) {
  const double s = std::sin(u.v), c = std::cos(u.v);
  return chain(u, c, -s, -c);
}
inline Jet2 tan(const Jet2& u) {
  const double t = std::tan(u.v), sec2 = 1.0 + t * t;
  return chain(u, t, sec2, 2.0 * t * sec2);
}
inline Jet2 sinh(const Jet2& u) {
  const double s = std::sinh(u.v), c = std::cosh(u.v);
  return chain(u, s, c, s);
}
inline Jet2 cosh(const Jet2& u) {
  const double s = std::sinh(u.v), c = std::cosh(u.v);
  return chain(u, c, s, c);
}
inline Jet2 tanh(const Jet2& u) {
  const double t = std::tanh(u.v), sech2 = 1.0 - t * t;
  return chain(u, t, sech2, -2.0 * t * sech2);
}
inline Jet2 exp(const Jet2& u) {
  const double e = std::exp(u.v);
  return chain(u, e, e, e);
}
inline Jet2 log(const Jet2& u) {
  return chain(u, std::log(u.v), 1.0 / u.v, -1.0 / (u.v * u.v));
}
inline Jet2 sqrt(const Jet2& u) {
  const double r = std::sqrt(u.v);
  return chain(u, r, 0.5 / r, -0.25 / (r * u.v));
}
inline Jet2 cbrt(const Jet2& u) {
  const double c = std::cbrt(u.v);
  const double c2 = c * c;
  return chain(u, c, 1.0 / (3.0 * c2), -2.0 / (9.0 * c2 * c2 * c));
}

/// atan2 with both arguments carried as jets.
inline Jet2 atan2(const Jet2& y, const Jet2& x) {
  const double r2 = x.v * x.v + y.v * y.v;
  const double n = x.v * y.d1 - y.v * x.d1;
  const double np = x.v * y.d2 - y.v * x.d2;
  const double r2p = 2.0 * (x.v * x.d1 + y.v * y.d1);
  return {std::atan2(y.v, x.v), n / r2, np / r2 - n * r2p / (r2 * r2)};
}

/// Integer power by repeated multiplication (negative exponents via 1/x^n).
template <class T> T pow_int(const T& base, int n) {
  if (n == 0) return T(1.0);
  const bool neg = n < 0;
  unsigned k = neg ? static_cast<unsigned>(-(long long)n)
                   : static_cast<unsigned>(n);
  T acc(1.0), b = base;
  while (k != 0) {
    if (k & 1u) acc = acc * b;
    b = b * b;
    k >>= 1;
  }
  return neg ? T(1.0) / acc : acc;
}

inline Jet2 pow(const Jet2& u, int n) { return pow_int(u, n); }

}  // namespace lagrflow
