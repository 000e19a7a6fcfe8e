/// @file rotation.hpp
/// @brief Unit-quadruple rotation machinery: the two 3x4 half matrices, their
///        4x4 extensions, the closed-form rotation matrix, the attitude
///        kinematics a' = (1/4) Ktil(w)^T a, and an adaptive integrator for
///        attitude histories driven by a rate function w(t).
#pragma once

#include <array>
#include <functional>
#include <memory>

#include "lagrflow/jet.hpp"
#include "lagrflow/ode.hpp"
#include "lagrflow/smallmath.hpp"

namespace lagrflow {

using Quat = std::array<double, 4>;
using QuatJ = std::array<Jet2, 4>;
using Vec3J = Vec3T<Jet2>;

template <class T> using Mat34T = std::array<std::array<T, 4>, 3>;
template <class T> using Mat44T = std::array<std::array<T, 4>, 4>;
template <class T> using Mat33T = std::array<std::array<T, 3>, 3>;
using Mat34 = Mat34T<double>;
using Mat44 = Mat44T<double>;
using Mat33 = Mat33T<double>;

/// H(a): rows (-a1, a0, a3, -a2), (-a2, -a3, a0, a1), (-a3, a2, -a1, a0).
template <class T> Mat34T<T> h_matrix(const std::array<T, 4>& a) {
  return {{{-a[1], a[0], a[3], -a[2]},
           {-a[2], -a[3], a[0], a[1]},
           {-a[3], a[2], -a[1], a[0]}}};
}

/// Htil(a): rows (-a1, a0, -a3, a2), (-a2, a3, a0, -a1), (-a3, -a2, a1, a0).
template <class T> Mat34T<T> h_tilde(const std::array<T, 4>& a) {
  return {{{-a[1], a[0], -a[3], a[2]},
           {-a[2], a[3], a[0], -a[1]},
           {-a[3], -a[2], a[1], a[0]}}};
}

/// K(a) / Ktil(a): the corresponding half matrix with the row (a0,a1,a2,a3)
/// prepended.
template <class T> Mat44T<T> k_matrix(const std::array<T, 4>& a) {
  const Mat34T<T> h = h_matrix(a);
  return {{{a[0], a[1], a[2], a[3]}, h[0], h[1], h[2]}};
}
template <class T> Mat44T<T> k_tilde(const std::array<T, 4>& a) {
  const Mat34T<T> h = h_tilde(a);
  return {{{a[0], a[1], a[2], a[3]}, h[0], h[1], h[2]}};
}

/// Closed-form rotation matrix of a unit quadruple (equals Htil(a) H(a)^T).
template <class T> Mat33T<T> rotation_matrix(const std::array<T, 4>& a) {
  const T a00 = a[0] * a[0], a11 = a[1] * a[1], a22 = a[2] * a[2],
          a33 = a[3] * a[3];
  const T two(2.0);
  return {{{a00 + a11 - a22 - a33, two * (a[1] * a[2] - a[0] * a[3]),
            two * (a[1] * a[3] + a[0] * a[2])},
           {two * (a[1] * a[2] + a[0] * a[3]), a00 - a11 + a22 - a33,
            two * (a[2] * a[3] - a[0] * a[1])},
           {two * (a[1] * a[3] - a[0] * a[2]), two * (a[2] * a[3] + a[0] * a[1]),
            a00 - a11 - a22 + a33}}};
}

/// Kinematics a' = (1/4) Ktil((0,w))^T a, written out componentwise.
template <class T>
std::array<T, 4> attitude_rhs(const std::array<T, 4>& a, const Vec3T<T>& w) {
  const T q(0.25);
  return {q * -(w[0] * a[1] + w[1] * a[2] + w[2] * a[3]),
          q * (w[0] * a[0] + w[2] * a[2] - w[1] * a[3]),
          q * (w[1] * a[0] - w[2] * a[1] + w[0] * a[3]),
          q * (w[2] * a[0] + w[1] * a[1] - w[0] * a[2])};
}

/// Rate reconstruction w = 4 H(a) a'.
template <class T>
Vec3T<T> rate_from_attitude(const std::array<T, 4>& a,
                            const std::array<T, 4>& ap) {
  const Mat34T<T> h = h_matrix(a);
  Vec3T<T> w{};
  for (int r = 0; r < 3; ++r) {
    T acc = h[r][0] * ap[0];
    for (int ccol = 1; ccol < 4; ++ccol) acc += h[r][ccol] * ap[ccol];
    w[r] = T(4.0) * acc;
  }
  return w;
}

/// Cross (skew) matrix [v]x.
inline Mat33 cross_matrix(const Vec3& v) {
  return {{{0.0, -v[2], v[1]}, {v[2], 0.0, -v[0]}, {-v[1], v[0], 0.0}}};
}

/// Attitude history a(t) on [t0, t_end] with exact first/second derivatives
/// recovered from the kinematics and the rate jets.
class AttitudeTrajectory {
 public:
  OdeSolution sol;
  std::function<Vec3J(double)> rate_jets;  ///< w(t) with derivatives

  QuatJ eval(double t) const {
    const std::vector<double> av = sol.eval(t);
    const Vec3J wj = rate_jets(t);
    const Quat a{av[0], av[1], av[2], av[3]};
    const Vec3 w{wj[0].v, wj[1].v, wj[2].v};
    const Vec3 wp{wj[0].d1, wj[1].d1, wj[2].d1};
    const Quat ap = attitude_rhs(a, w);
    // a'' = rhs(a', w) + rhs(a, w'): the kinematics is bilinear in (a, w).
    const Quat app1 = attitude_rhs(ap, w);
    const Quat app2 = attitude_rhs(a, wp);
    QuatJ out;
    for (int i = 0; i < 4; ++i) out[i] = {a[i], ap[i], app1[i] + app2[i]};
    return out;
  }
};

/// Integrate the attitude kinematics with per-step unit-norm renormalization.
/// `rate` supplies w(t) as jets (only values are used by the stepper; the
/// derivative slots feed AttitudeTrajectory::eval).
inline AttitudeTrajectory integrate_attitude(
    const std::function<Vec3J(double)>& rate, const Quat& a0, double t0,
    double t1, double abs_tol = 1e-10, double rel_tol = 1e-10) {
  OdeRhs rhs = [rate](double t, const std::vector<double>& y,
                      std::vector<double>& dy) {
    const Vec3J wj = rate(t);
    const Quat a{y[0], y[1], y[2], y[3]};
    const Vec3 w{wj[0].v, wj[1].v, wj[2].v};
    const Quat ap = attitude_rhs(a, w);
    dy.assign(ap.begin(), ap.end());
  };
  OdeOptions opt;
  opt.abs_tol = abs_tol;
  opt.rel_tol = rel_tol;
  opt.renormalize = [](std::vector<double>& y) {
    const double n = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2] +
                               y[3] * y[3]);
    for (double& v : y) v /= n;
  };
  AttitudeTrajectory traj;
  traj.sol = integrate_ode(rhs, {a0[0], a0[1], a0[2], a0[3]}, t0, t1, opt);
  traj.rate_jets = rate;
  return traj;
}

/// Identity attitude history (rate zero), for families without rotation.
inline AttitudeTrajectory identity_attitude(double t0, double t1) {
  return integrate_attitude(
      [](double) {
        return Vec3J{Jet2(0.0), Jet2(0.0), Jet2(0.0)};
      },
      {1.0, 0.0, 0.0, 0.0}, t0, t1);
}

}  // namespace lagrflow
