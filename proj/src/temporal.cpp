// ---------------------------------------------------------------------------
// Time component: measured pair coefficients and triple minors from column
// jets, declared-functional evaluation, and frame changes.
// ---------------------------------------------------------------------------

#include "lagrflow/temporal.hpp"

#include <cmath>
#include <sstream>

#include "lagrflow/errors.hpp"

namespace lagrflow {

Mat3x<double> TimeComponent::matrix(double t) const {
  const Mat3x<Jet2> cj = columns(t);
  Mat3x<double> out;
  out.cols = cj.cols;
  for (int j = 0; j < cj.cols; ++j) {
    for (int a = 0; a < 3; ++a) out[j][a] = cj[j][a].v;
  }
  return out;
}

Mat3x<double> TimeComponent::matrix_dt(double t) const {
  const Mat3x<Jet2> cj = columns(t);
  Mat3x<double> out;
  out.cols = cj.cols;
  for (int j = 0; j < cj.cols; ++j) {
    for (int a = 0; a < 3; ++a) out[j][a] = cj[j][a].d1;
  }
  return out;
}

Mat3x<double> TimeComponent::matrix_dtt(double t) const {
  const Mat3x<Jet2> cj = columns(t);
  Mat3x<double> out;
  out.cols = cj.cols;
  for (int j = 0; j < cj.cols; ++j) {
    for (int a = 0; a < 3; ++a) out[j][a] = cj[j][a].d2;
  }
  return out;
}

double TimeComponent::pair_coefficient(double t, int i, int j) const {
  const Mat3x<Jet2> cj = columns(t);
  const Vec3T<Jet2>& ci = cj[i - 1];
  const Vec3T<Jet2>& cjj = cj[j - 1];
  double acc = 0.0;
  for (int a = 0; a < 3; ++a) {
    acc += ci[a].d1 * cjj[a].v - cjj[a].d1 * ci[a].v;
  }
  return acc;
}

double TimeComponent::triple_minor(double t, int i, int j, int k) const {
  const Mat3x<Jet2> cj = columns(t);
  Vec3 a, b, c;
  for (int r = 0; r < 3; ++r) {
    a[r] = cj[i - 1][r].v;
    b[r] = cj[j - 1][r].v;
    c[r] = cj[k - 1][r].v;
  }
  return det3(a, b, c);
}

double TimeComponent::pair_value(double t, const PairFunctional& f) const {
  const Mat3x<Jet2> cj = columns(t);
  double acc = 0.0;
  for (const PairFunctionalTerm& term : f.terms) {
    const Vec3T<Jet2>& ci = cj[term.i - 1];
    const Vec3T<Jet2>& cjj = cj[term.j - 1];
    double q = 0.0;
    for (int a = 0; a < 3; ++a) {
      q += ci[a].d1 * cjj[a].v - cjj[a].d1 * ci[a].v;
    }
    acc += term.coeff * q;
  }
  return acc;
}

double TimeComponent::triple_value(double t, const TripleFunctional& f) const {
  double acc = 0.0;
  for (const TripleFunctionalTerm& term : f.terms) {
    acc += term.coeff * triple_minor(t, term.i, term.j, term.k);
  }
  return acc;
}

void TimeComponent::require_in_horizon(double t) const {
  const double slack = 1e-9 * (t1 - t0 > 0.0 ? t1 - t0 : 1.0);
  if (t < t0 - slack || t > t_end + slack) {
    std::ostringstream os;
    os << "time " << t << " outside the usable horizon [" << t0 << ", "
       << t_end << "]";
    if (truncated) os << " (truncated: " << truncation_reason << ")";
    throw NumericError(os.str());
  }
}

MatM MatM::identity(int m) {
  MatM h;
  h.m = m;
  for (int i = 0; i < m; ++i) h.at(i, i) = 1.0;
  return h;
}

MatM mat_mul(const MatM& x, const MatM& y) {
  MatM out;
  out.m = x.m;
  for (int r = 0; r < x.m; ++r) {
    for (int c = 0; c < x.m; ++c) {
      double acc = 0.0;
      for (int k = 0; k < x.m; ++k) acc += x.at(r, k) * y.at(k, c);
      out.at(r, c) = acc;
    }
  }
  return out;
}

double mat_det(const MatM& x) {
  std::array<std::array<double, 6>, 6> m = x.a;
  const int n = x.m;
  double det = 1.0;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int r = k + 1; r < n; ++r) {
      if (std::fabs(m[r][k]) > std::fabs(m[piv][k])) piv = r;
    }
    if (m[piv][k] == 0.0) return 0.0;
    if (piv != k) {
      std::swap(m[piv], m[k]);
      det = -det;
    }
    det *= m[k][k];
    for (int r = k + 1; r < n; ++r) {
      const double f = m[r][k] / m[k][k];
      for (int c = k; c < n; ++c) m[r][c] -= f * m[k][c];
    }
  }
  return det;
}

MatM mat_inverse(const MatM& x) {
  const int n = x.m;
  std::array<std::array<double, 12>, 6> aug{};
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) aug[r][c] = x.at(r, c);
    aug[r][n + r] = 1.0;
  }
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int r = k + 1; r < n; ++r) {
      if (std::fabs(aug[r][k]) > std::fabs(aug[piv][k])) piv = r;
    }
    if (std::fabs(aug[piv][k]) < 1e-300) {
      throw NumericError("frame-change matrix is singular");
    }
    if (piv != k) std::swap(aug[piv], aug[k]);
    const double d = aug[k][k];
    for (int c = 0; c < 2 * n; ++c) aug[k][c] /= d;
    for (int r = 0; r < n; ++r) {
      if (r == k) continue;
      const double f = aug[r][k];
      if (f == 0.0) continue;
      for (int c = 0; c < 2 * n; ++c) aug[r][c] -= f * aug[k][c];
    }
  }
  MatM out;
  out.m = n;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) out.at(r, c) = aug[r][n + c];
  }
  return out;
}

namespace {

/// det of the 3x3 submatrix of H with the given (0-based) rows and columns.
double minor_3x3(const MatM& h, const std::array<int, 3>& rows,
                 const std::array<int, 3>& cols) {
  Vec3 c0, c1, c2;
  for (int r = 0; r < 3; ++r) {
    c0[r] = h.at(rows[r], cols[0]);
    c1[r] = h.at(rows[r], cols[1]);
    c2[r] = h.at(rows[r], cols[2]);
  }
  return det3(c0, c1, c2);
}

}  // namespace

TimeComponent gauge_transform_time(const TimeComponent& tc, const MatM& H) {
  if (H.m != tc.m) {
    throw ConfigError("frame-change matrix size does not match the component");
  }
  const int m = tc.m;
  const MatM Hinv = mat_inverse(H);

  TimeComponent out;
  out.family = tc.family + "+frame";
  out.m = m;
  out.t0 = tc.t0;
  out.t1 = tc.t1;
  out.truncated = tc.truncated;
  out.t_end = tc.t_end;
  out.truncation_reason = tc.truncation_reason;

  const std::function<Mat3x<Jet2>(double)> base = tc.columns;
  out.columns = [base, H, m](double t) {
    const Mat3x<Jet2> orig = base(t);
    Mat3x<Jet2> mixed;
    mixed.cols = m;
    for (int j = 0; j < m; ++j) {
      for (int a = 0; a < 3; ++a) {
        Jet2 acc;
        for (int i = 0; i < m; ++i) {
          acc += Jet2(H.at(i, j)) * orig[i][a];
        }
        mixed[j][a] = acc;
      }
    }
    return mixed;
  };

  // The pointwise coefficients transform as Q~ = H^T Q H and
  // p~_T = sum_S p_S det H[S, T], so each declared *functional* is carried
  // over with coefficients pulled through the inverse: the transported
  // functional measures the same number at every time, keeping both the
  // declared value and the constancy verdict intact (individual entries may
  // vary in time; only the declared combinations are invariant).
  for (const PairFunctional& f : tc.declared_pairs) {
    std::array<std::array<double, 6>, 6> C{};
    for (const PairFunctionalTerm& term : f.terms) {
      C[static_cast<std::size_t>(term.i - 1)]
       [static_cast<std::size_t>(term.j - 1)] += term.coeff;
      C[static_cast<std::size_t>(term.j - 1)]
       [static_cast<std::size_t>(term.i - 1)] -= term.coeff;
    }
    std::array<std::array<double, 6>, 6> Ct{};
    double scale = 0.0;
    for (int r = 0; r < m; ++r) {
      for (int s = 0; s < m; ++s) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < m; ++j) {
            acc += Hinv.at(r, i) *
                   C[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                   Hinv.at(s, j);
          }
        }
        Ct[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)] = acc;
        scale = std::max(scale, std::fabs(acc));
      }
    }
    PairFunctional nf{f.name, {}, f.value};
    for (int r = 0; r < m; ++r) {
      for (int s = r + 1; s < m; ++s) {
        const double c =
            Ct[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)];
        if (std::fabs(c) > 1e-12 * scale) {
          nf.terms.push_back({r + 1, s + 1, c});
        }
      }
    }
    out.declared_pairs.push_back(std::move(nf));
  }

  std::vector<std::array<int, 3>> subsets;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      for (int k = j + 1; k < m; ++k) subsets.push_back({i, j, k});
    }
  }
  for (const TripleFunctional& f : tc.declared_triples) {
    // Canonical coefficients over ascending subsets (written order folded in
    // through the permutation sign).
    std::vector<double> c(subsets.size(), 0.0);
    for (const TripleFunctionalTerm& term : f.terms) {
      std::array<int, 3> idx{term.i - 1, term.j - 1, term.k - 1};
      double sign = 1.0;
      for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2 - x; ++y) {
          if (idx[y] > idx[y + 1]) {
            std::swap(idx[y], idx[y + 1]);
            sign = -sign;
          }
        }
      }
      for (std::size_t s = 0; s < subsets.size(); ++s) {
        if (subsets[s] == idx) c[s] += sign * term.coeff;
      }
    }
    std::vector<double> ct(subsets.size(), 0.0);
    double scale = 0.0;
    for (std::size_t T = 0; T < subsets.size(); ++T) {
      double acc = 0.0;
      for (std::size_t S = 0; S < subsets.size(); ++S) {
        if (c[S] != 0.0) acc += c[S] * minor_3x3(Hinv, subsets[T], subsets[S]);
      }
      ct[T] = acc;
      scale = std::max(scale, std::fabs(acc));
    }
    TripleFunctional nf{f.name, {}, f.value};
    for (std::size_t T = 0; T < subsets.size(); ++T) {
      if (std::fabs(ct[T]) > 1e-12 * scale) {
        nf.terms.push_back(
            {subsets[T][0] + 1, subsets[T][1] + 1, subsets[T][2] + 1, ct[T]});
      }
    }
    out.declared_triples.push_back(std::move(nf));
  }

  return out;
}

}  // namespace lagrflow
