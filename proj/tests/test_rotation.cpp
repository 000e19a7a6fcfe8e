/// @file test_rotation.cpp
/// @brief Rotation machinery: closed-form rotation matrix vs the half-matrix
///        product, attitude kinematics, rate reconstruction, unit-norm drift
///        on long horizons, and conservation of the canonical two-form by
///        the variational flow.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "lagrflow/rotation.hpp"

using namespace lagrflow;

namespace {

Quat random_unit_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Quat a{g(rng), g(rng), g(rng), g(rng)};
  double n = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2] + a[3] * a[3]);
  for (double& v : a) v /= n;
  return a;
}

double quat_norm(const std::vector<double>& y) {
  return std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3]);
}

/// Bounded smooth rate used in the long-horizon tests.
Vec3J test_rate(double t) {
  const Jet2 tj = Jet2::variable(t);
  return {Jet2(0.8) * sin(tj), Jet2(0.5) * cos(Jet2(2.0) * tj),
          Jet2(0.3) + Jet2(0.2) * sin(Jet2(0.5) * tj)};
}

}  // namespace

// ===========================================================================
// Matrix identities
// ===========================================================================

TEST_CASE("closed-form rotation equals Htil(a) H(a)^T and is orthogonal") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const Quat a = random_unit_quat(rng);
    const Mat33 r = rotation_matrix(a);
    const Mat34 ht = h_tilde(a);
    const Mat34 h = h_matrix(a);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double prod = 0.0;
        for (int k = 0; k < 4; ++k) prod += ht[i][k] * h[j][k];
        CHECK(r[i][j] == doctest::Approx(prod).epsilon(1e-14));
      }
    // R^T R = I to 1e-12 and det R = 1.
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double dotc = 0.0;
        for (int k = 0; k < 3; ++k) dotc += r[k][i] * r[k][j];
        CHECK(std::fabs(dotc - (i == j ? 1.0 : 0.0)) <= 1e-12);
      }
    const Vec3 c0{r[0][0], r[1][0], r[2][0]}, c1{r[0][1], r[1][1], r[2][1]},
        c2{r[0][2], r[1][2], r[2][2]};
    CHECK(det3(c0, c1, c2) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("k matrices extend the half matrices by the parameter row") {
  std::mt19937_64 rng(22);
  const Quat a = random_unit_quat(rng);
  const Mat44 k = k_matrix(a);
  const Mat44 kt = k_tilde(a);
  const Mat34 h = h_matrix(a);
  const Mat34 ht = h_tilde(a);
  for (int j = 0; j < 4; ++j) {
    CHECK(k[0][j] == a[j]);
    CHECK(kt[0][j] == a[j]);
    for (int i = 0; i < 3; ++i) {
      CHECK(k[i + 1][j] == h[i][j]);
      CHECK(kt[i + 1][j] == ht[i][j]);
    }
  }
}

TEST_CASE("kinematics at the identity attitude") {
  const Quat a{1.0, 0.0, 0.0, 0.0};
  const Vec3 w{0.0, 0.0, 1.7};
  const Quat ap = attitude_rhs(a, w);
  CHECK(ap[0] == doctest::Approx(0.0));
  CHECK(ap[1] == doctest::Approx(0.0));
  CHECK(ap[2] == doctest::Approx(0.0));
  CHECK(ap[3] == doctest::Approx(1.7 / 4.0));
}

TEST_CASE("rate reconstruction inverts the kinematics") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int trial = 0; trial < 25; ++trial) {
    const Quat a = random_unit_quat(rng);
    const Vec3 w{dist(rng), dist(rng), dist(rng)};
    const Quat ap = attitude_rhs(a, w);
    const Vec3 back = rate_from_attitude(a, ap);
    for (int i = 0; i < 3; ++i)
      CHECK(back[i] == doctest::Approx(w[i]).epsilon(1e-13));
  }
}

// ===========================================================================
// Integrated attitude histories
// ===========================================================================

TEST_CASE("single-axis rate reproduces the closed-form attitude") {
  // w = (2*0.7, 0, 0) constant: a(t) = (cos(0.35 t), sin(0.35 t), 0, 0) and
  // the rotation is about the first axis by angle 0.7 t.
  auto rate = [](double) {
    return Vec3J{Jet2(1.4), Jet2(0.0), Jet2(0.0)};
  };
  const AttitudeTrajectory traj =
      integrate_attitude(rate, {1.0, 0.0, 0.0, 0.0}, 0.0, 3.0);
  for (double t : {0.5, 1.25, 2.0, 3.0}) {
    const QuatJ aj = traj.eval(t);
    CHECK(aj[0].v == doctest::Approx(std::cos(0.35 * t)).epsilon(1e-9));
    CHECK(aj[1].v == doctest::Approx(std::sin(0.35 * t)).epsilon(1e-9));
    CHECK(std::fabs(aj[2].v) <= 1e-12);
    CHECK(std::fabs(aj[3].v) <= 1e-12);
    const std::array<Jet2, 4> a{aj[0], aj[1], aj[2], aj[3]};
    const Mat33T<Jet2> r = rotation_matrix(a);
    CHECK(r[1][1].v == doctest::Approx(std::cos(0.7 * t)).epsilon(1e-9));
    CHECK(r[1][2].v == doctest::Approx(-std::sin(0.7 * t)).epsilon(1e-9));
    CHECK(r[0][0].v == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("unit norm holds to 1e-9 over a long horizon") {
  const AttitudeTrajectory traj =
      integrate_attitude(test_rate, {1.0, 0.0, 0.0, 0.0}, 0.0, 10.0);
  REQUIRE(!traj.sol.truncated);
  for (int i = 0; i <= 200; ++i) {
    const double t = 10.0 * i / 200.0;
    CHECK(std::fabs(quat_norm(traj.sol.eval(t)) - 1.0) <= 1e-9);
  }
}

TEST_CASE("half-matrix product reconstructs the cross matrix of w/2") {
  const AttitudeTrajectory traj =
      integrate_attitude(test_rate, {1.0, 0.0, 0.0, 0.0}, 0.0, 10.0);
  for (int i = 0; i <= 40; ++i) {
    const double t = 10.0 * i / 40.0;
    const QuatJ aj = traj.eval(t);
    Quat a, ap;
    for (int k = 0; k < 4; ++k) {
      a[k] = aj[k].v;
      ap[k] = aj[k].d1;
    }
    const Vec3J wj = test_rate(t);
    const Vec3 w{wj[0].v, wj[1].v, wj[2].v};
    const Mat34 hp = h_matrix(ap);
    const Mat34 h = h_matrix(a);
    const Mat33 cm = cross_matrix({w[0] / 2, w[1] / 2, w[2] / 2});
    for (int r = 0; r < 3; ++r)
      for (int ccol = 0; ccol < 3; ++ccol) {
        double prod = 0.0;
        for (int k = 0; k < 4; ++k) prod += hp[r][k] * h[ccol][k];
        CHECK(std::fabs(2.0 * prod + cm[r][ccol]) <= 1e-6);
      }
  }
}

TEST_CASE("variational flow preserves the canonical two-form") {
  // The kinematics is linear and Hamiltonian for
  // omega = da0 ^ da1 + da2 ^ da3; difference two perturbed trajectories to
  // approximate the variational flow and check omega is conserved.
  auto run = [](const Quat& a0) {
    return integrate_attitude(test_rate, a0, 0.0, 10.0);
  };
  const double eps = 1e-4;
  const Quat u1{0.0, 1.0, 0.0, 0.0};
  const Quat u2{0.0, 0.0, 1.0, 0.0};
  auto perturb = [](const Quat& a, const Quat& dir, double e) {
    Quat out;
    for (int i = 0; i < 4; ++i) out[i] = a[i] + e * dir[i];
    double n = std::sqrt(out[0] * out[0] + out[1] * out[1] + out[2] * out[2] +
                         out[3] * out[3]);
    for (double& v : out) v /= n;
    return out;
  };
  const Quat base{0.9, 0.1, 0.4, std::sqrt(1.0 - 0.81 - 0.01 - 0.16)};
  const AttitudeTrajectory p1 = run(perturb(base, u1, eps));
  const AttitudeTrajectory m1 = run(perturb(base, u1, -eps));
  const AttitudeTrajectory p2 = run(perturb(base, u2, eps));
  const AttitudeTrajectory m2 = run(perturb(base, u2, -eps));
  auto omega = [](const std::vector<double>& x, const std::vector<double>& y) {
    return x[0] * y[1] - x[1] * y[0] + x[2] * y[3] - x[3] * y[2];
  };
  auto variation = [eps](const AttitudeTrajectory& plus,
                         const AttitudeTrajectory& minus, double t) {
    const std::vector<double> yp = plus.sol.eval(t);
    const std::vector<double> ym = minus.sol.eval(t);
    std::vector<double> d(4);
    for (int i = 0; i < 4; ++i) d[i] = (yp[i] - ym[i]) / (2 * eps);
    return d;
  };
  const double w0 = omega(variation(p1, m1, 0.0), variation(p2, m2, 0.0));
  for (double t : {2.5, 5.0, 7.5, 10.0}) {
    const double wt = omega(variation(p1, m1, t), variation(p2, m2, t));
    CHECK(std::fabs(wt - w0) <= 1e-6 * (1.0 + std::fabs(w0)));
  }
}
