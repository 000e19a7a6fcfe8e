#pragma once
// ---------------------------------------------------------------------------
// Time component A(t) of a separated flow map phi = A(t) v(z).
//
// A TimeComponent produces the 3 x m column matrix together with its first
// and second time derivatives (as second-order jets), plus the family's
// declared invariants: values of the pair coefficients
// q_(i,j) = <A_i', A_j> - <A_j', A_i> and of the column-triple minors
// e_(i,j,k) = det(A_i, A_j, A_k) that must stay constant along the horizon.
// Verification measures both from the jets and compares against the
// declarations at every time sample.
// ---------------------------------------------------------------------------

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "lagrflow/jet.hpp"
#include "lagrflow/smallmath.hpp"

namespace lagrflow {

/// One term of a declared pair functional: coeff * q_(i,j); 1-based indices.
struct PairFunctionalTerm {
  int i = 0, j = 0;
  double coeff = 1.0;
};

struct PairFunctional {
  std::string name;  ///< e.g. "q12" or "q15-q26"
  std::vector<PairFunctionalTerm> terms;
  double value = 0.0;  ///< declared constant value
};

/// One term of a declared triple functional: coeff * e_(i,j,k).
struct TripleFunctionalTerm {
  int i = 0, j = 0, k = 0;
  double coeff = 1.0;
};

struct TripleFunctional {
  std::string name;  ///< e.g. "e123" or "e145-e246"
  std::vector<TripleFunctionalTerm> terms;
  double value = 0.0;
};

struct TimeComponent {
  std::string family;
  int m = 0;
  double t0 = 0.0, t1 = 1.0;
  bool truncated = false;
  double t_end = 1.0;  ///< usable end of the horizon (== t1 unless truncated)
  std::string truncation_reason;

  /// A(t) with exact first and second time derivatives in the jet slots.
  std::function<Mat3x<Jet2>(double)> columns;

  std::vector<PairFunctional> declared_pairs;
  std::vector<TripleFunctional> declared_triples;

  Mat3x<double> matrix(double t) const;
  Mat3x<double> matrix_dt(double t) const;
  Mat3x<double> matrix_dtt(double t) const;

  /// q_(i,j) measured from the jets at time t (1-based).
  double pair_coefficient(double t, int i, int j) const;
  /// e_(i,j,k) measured at time t (1-based, in the written order).
  double triple_minor(double t, int i, int j, int k) const;

  double pair_value(double t, const PairFunctional& f) const;
  double triple_value(double t, const TripleFunctional& f) const;

  /// Throws NumericError when t falls outside [t0, t_end] (tiny slack for
  /// endpoint arithmetic).
  void require_in_horizon(double t) const;
};

/// Dense m x m real matrix, m <= 6; used for frame changes of the columns.
struct MatM {
  int m = 0;
  std::array<std::array<double, 6>, 6> a{};

  static MatM identity(int m);
  double& at(int r, int c) { return a[static_cast<std::size_t>(r)]
                                    [static_cast<std::size_t>(c)]; }
  double at(int r, int c) const { return a[static_cast<std::size_t>(r)]
                                          [static_cast<std::size_t>(c)]; }
};

MatM mat_mul(const MatM& x, const MatM& y);
double mat_det(const MatM& x);
/// Gauss-Jordan with partial pivoting; throws NumericError when singular.
MatM mat_inverse(const MatM& x);

/// Frame change on the column side: the new component produces A(t) H, and
/// every declared functional is transported with it — pair coefficients
/// change by the congruence H^T Q H and triple minors by the third compound
/// matrix of H, so each declared combination is rewritten through the
/// inverse to measure the same number in the new frame.  Declared values and
/// constancy verdicts are therefore preserved exactly.
TimeComponent gauge_transform_time(const TimeComponent& tc, const MatM& H);

}  // namespace lagrflow
