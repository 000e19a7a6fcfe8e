/// @file test_temporal.cpp
/// @brief Time components: jet-measured pair coefficients and triple minors
///        against finite differences, declared-functional evaluation, the
///        small dense matrix helpers, and frame changes that must preserve
///        declared values on components whose individual minors vary.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lagrflow/errors.hpp"
#include "lagrflow/temporal.hpp"

using namespace lagrflow;

namespace {

/// Plane rotation block: A = (cos t, sin t, 0), (-sin t, cos t, 0), e3.
TimeComponent spin_component() {
  TimeComponent tc;
  tc.family = "demo-spin";
  tc.m = 3;
  tc.t0 = 0.0;
  tc.t1 = 1.0;
  tc.t_end = 1.0;
  tc.columns = [](double t) {
    const Jet2 tj = Jet2::variable(t);
    Mat3x<Jet2> A;
    A.cols = 3;
    A[0] = {cos(tj), sin(tj), Jet2(0.0)};
    A[1] = {-sin(tj), cos(tj), Jet2(0.0)};
    A[2] = {Jet2(0.0), Jet2(0.0), Jet2(1.0)};
    return A;
  };
  tc.declared_pairs = {
      {"q12", {{1, 2, 1.0}}, 2.0},
      {"q13", {{1, 3, 1.0}}, 0.0},
      {"q23", {{2, 3, 1.0}}, 0.0},
  };
  tc.declared_triples = {{"e123", {{1, 2, 3, 1.0}}, 1.0}};
  return tc;
}

/// Five-column stretch component with a linearly drifting factor: the pair
/// coefficients are constant but several triple minors vary in time.
TimeComponent stretch5_component(double c15, double l0) {
  TimeComponent tc;
  tc.family = "demo-stretch";
  tc.m = 5;
  tc.t0 = 0.0;
  tc.t1 = 1.0;
  tc.t_end = 1.0;
  tc.columns = [c15, l0](double t) {
    const Jet2 l{l0 - c15 * t, -c15, 0.0};
    const Jet2 zero(0.0), one(1.0);
    Mat3x<Jet2> A;
    A.cols = 5;
    A[0] = {one, zero, zero};
    A[1] = {zero, l, zero};
    A[2] = {zero, zero, one / l};
    A[3] = {zero, one, zero};
    A[4] = {l, zero, zero};
    return A;
  };
  tc.declared_pairs = {
      {"q15", {{1, 5, 1.0}}, c15},
      {"q24", {{2, 4, 1.0}}, -c15},
      {"q12", {{1, 2, 1.0}}, 0.0},
      {"q34", {{3, 4, 1.0}}, 0.0},
  };
  tc.declared_triples = {
      {"e123", {{1, 2, 3, 1.0}}, 1.0},
      {"e345", {{3, 4, 5, 1.0}}, -1.0},
      {"e135", {{1, 3, 5, 1.0}}, 0.0},
      // e134*e235 is l-dependent individually; their product form is not a
      // linear functional, so only genuinely linear invariants are declared.
      {"e124", {{1, 2, 4, 1.0}}, 0.0},
  };
  return tc;
}

}  // namespace

// ===========================================================================
// Measured coefficients
// ===========================================================================

TEST_CASE("derivative matrices agree with finite differences") {
  TimeComponent tc = spin_component();
  const double h = 1e-6;   // first derivative: truncation ~h^2
  const double h2 = 1e-4;  // second derivative: balances cancellation
  for (double t : {0.1, 0.45, 0.9}) {
    Mat3x<double> d = tc.matrix_dt(t);
    Mat3x<double> dd = tc.matrix_dtt(t);
    Mat3x<double> lo = tc.matrix(t - h);
    Mat3x<double> hi = tc.matrix(t + h);
    Mat3x<double> lo2 = tc.matrix(t - h2);
    Mat3x<double> hi2 = tc.matrix(t + h2);
    Mat3x<double> mid = tc.matrix(t);
    for (int j = 0; j < 3; ++j) {
      for (int a = 0; a < 3; ++a) {
        CHECK(d[j][a] ==
              doctest::Approx((hi[j][a] - lo[j][a]) / (2 * h)).epsilon(1e-8));
        CHECK(dd[j][a] == doctest::Approx((hi2[j][a] - 2 * mid[j][a] +
                                           lo2[j][a]) /
                                          (h2 * h2))
                              .epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("spin block: declared pairs and triples match measurements") {
  TimeComponent tc = spin_component();
  for (double t : {0.0, 0.3, 0.7, 1.0}) {
    for (const PairFunctional& f : tc.declared_pairs) {
      CHECK(tc.pair_value(t, f) == doctest::Approx(f.value).epsilon(1e-12));
    }
    for (const TripleFunctional& f : tc.declared_triples) {
      CHECK(tc.triple_value(t, f) == doctest::Approx(f.value).epsilon(1e-12));
    }
  }
}

TEST_CASE("stretch component: pair coefficients are the declared drifts") {
  TimeComponent tc = stretch5_component(0.8, 2.0);
  for (double t : {0.0, 0.5, 1.0}) {
    CHECK(tc.pair_coefficient(t, 1, 5) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(tc.pair_coefficient(t, 2, 4) == doctest::Approx(-0.8).epsilon(1e-12));
    CHECK(tc.pair_coefficient(t, 5, 1) == doctest::Approx(-0.8).epsilon(1e-12));
    // Individual minors drift with the stretch factor.
    const double l = 2.0 - 0.8 * t;
    CHECK(tc.triple_minor(t, 1, 3, 4) == doctest::Approx(-1.0 / l));
    CHECK(tc.triple_minor(t, 2, 3, 5) == doctest::Approx(l));
    CHECK(tc.triple_minor(t, 3, 4, 5) == doctest::Approx(-1.0));
  }
}

TEST_CASE("triple_minor respects the written order") {
  TimeComponent tc = spin_component();
  CHECK(tc.triple_minor(0.4, 2, 1, 3) == doctest::Approx(-1.0));
  CHECK(tc.triple_minor(0.4, 2, 3, 1) == doctest::Approx(1.0));
}

TEST_CASE("horizon enforcement") {
  TimeComponent tc = spin_component();
  CHECK_NOTHROW(tc.require_in_horizon(0.0));
  CHECK_NOTHROW(tc.require_in_horizon(1.0));
  CHECK_THROWS_AS(tc.require_in_horizon(1.5), NumericError);
  CHECK_THROWS_AS(tc.require_in_horizon(-0.1), NumericError);
  tc.truncated = true;
  tc.t_end = 0.5;
  tc.truncation_reason = "demo";
  CHECK_THROWS_AS(tc.require_in_horizon(0.75), NumericError);
}

// ===========================================================================
// Dense matrix helpers
// ===========================================================================

TEST_CASE("MatM determinant, product, and inverse") {
  MatM h = MatM::identity(3);
  h.at(0, 1) = 2.0;
  h.at(2, 0) = -1.0;
  h.at(1, 2) = 0.5;
  h.at(2, 2) = 2.0;
  // Cofactor by hand: det [[1,2,0],[0,1,0.5],[-1,0,2]] = 2 - 2*(0.5) = 1.
  CHECK(mat_det(h) == doctest::Approx(1.0));
  MatM inv = mat_inverse(h);
  MatM prod = mat_mul(h, inv);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      CHECK(prod.at(r, c) == doctest::Approx(r == c ? 1.0 : 0.0));
    }
  }
  MatM sing;
  sing.m = 2;
  sing.at(0, 0) = 1.0;
  sing.at(0, 1) = 2.0;
  sing.at(1, 0) = 2.0;
  sing.at(1, 1) = 4.0;
  CHECK_THROWS_AS(mat_inverse(sing), NumericError);
}

// ===========================================================================
// Frame changes
// ===========================================================================

TEST_CASE("frame change: columns mix and sizes must match") {
  TimeComponent tc = spin_component();
  MatM h = MatM::identity(3);
  h.at(0, 0) = 2.0;
  TimeComponent gt = gauge_transform_time(tc, h);
  Mat3x<double> a = tc.matrix(0.6);
  Mat3x<double> b = gt.matrix(0.6);
  for (int r = 0; r < 3; ++r) {
    CHECK(b[0][r] == doctest::Approx(2.0 * a[0][r]));
    CHECK(b[1][r] == doctest::Approx(a[1][r]));
  }
  CHECK_THROWS_AS(gauge_transform_time(tc, MatM::identity(4)), ConfigError);
}

TEST_CASE("frame change preserves every declared functional across time") {
  // A full scramble (nontrivial in every block) on the stretch component,
  // whose individual triple minors vary: the transported combinations must
  // still measure the declared constants at every sample.
  TimeComponent tc = stretch5_component(1.1, 3.0);
  MatM h = MatM::identity(5);
  h.at(0, 1) = 0.3;
  h.at(0, 3) = 0.1;
  h.at(1, 2) = 0.2;
  h.at(2, 0) = 0.5;
  h.at(2, 4) = 0.4;
  h.at(3, 4) = 0.2;
  h.at(4, 1) = 0.1;
  TimeComponent gt = gauge_transform_time(tc, h);
  REQUIRE(gt.declared_pairs.size() == tc.declared_pairs.size());
  REQUIRE(gt.declared_triples.size() == tc.declared_triples.size());
  for (double t : {0.0, 0.25, 0.6, 1.0}) {
    for (std::size_t i = 0; i < gt.declared_pairs.size(); ++i) {
      CHECK(gt.declared_pairs[i].value ==
            doctest::Approx(tc.declared_pairs[i].value));
      CHECK(gt.pair_value(t, gt.declared_pairs[i]) ==
            doctest::Approx(gt.declared_pairs[i].value).epsilon(1e-10));
    }
    for (std::size_t i = 0; i < gt.declared_triples.size(); ++i) {
      CHECK(gt.triple_value(t, gt.declared_triples[i]) ==
            doctest::Approx(gt.declared_triples[i].value).epsilon(1e-10));
    }
  }
}

TEST_CASE("frame change matches direct measurement of the mixed columns") {
  TimeComponent tc = stretch5_component(0.7, 2.5);
  MatM h = MatM::identity(5);
  h.at(1, 0) = -0.6;
  h.at(3, 2) = 0.8;
  h.at(0, 4) = 0.25;
  TimeComponent gt = gauge_transform_time(tc, h);
  // Pointwise: Q~_ij = (H^T Q H)_ij measured directly on the mixed columns.
  for (double t : {0.2, 0.9}) {
    for (int i = 1; i <= 5; ++i) {
      for (int j = i + 1; j <= 5; ++j) {
        double direct = 0.0;
        for (int r = 1; r <= 5; ++r) {
          for (int s = 1; s <= 5; ++s) {
            if (r == s) continue;
            const double q = tc.pair_coefficient(t, r, s);
            direct += h.at(r - 1, i - 1) * q * h.at(s - 1, j - 1);
          }
        }
        CHECK(gt.pair_coefficient(t, i, j) ==
              doctest::Approx(direct).epsilon(1e-10));
      }
    }
  }
}
