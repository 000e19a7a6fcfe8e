/// @file ode.hpp
/// @brief Adaptive Dormand-Prince 5(4) integrator with fourth-order dense
///        output, an optional per-step renormalization hook, and guard
///        functions that truncate the trajectory (with a recorded reason)
///        when a forbidden region is approached.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "lagrflow/errors.hpp"

namespace lagrflow {

using OdeRhs =
    std::function<void(double, const std::vector<double>&, std::vector<double>&)>;

/// Trajectory stays valid while the guard value is positive.
struct OdeGuard {
  std::string name;
  std::function<double(double, const std::vector<double>&)> value;
};

struct OdeOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  /// Applied to the accepted state at each step end (e.g. unit-norm
  /// projection of attitude parameters).
  std::function<void(std::vector<double>&)> renormalize;
  std::vector<OdeGuard> guards;
  std::size_t max_steps = 2000000;
};

/// Dense representation of one accepted step on [t0, t0+h].
struct OdeStep {
  double t0 = 0.0, h = 0.0;
  std::vector<double> r1, r2, r3, r4, r5;
};

class OdeSolution {
 public:
  double t_begin = 0.0;
  double t_end = 0.0;      ///< possibly truncated
  bool truncated = false;
  std::string truncation_reason;
  std::vector<OdeStep> steps;

  /// Dense state at t (clamped to [t_begin, t_end]).
  std::vector<double> eval(double t) const {
    t = std::clamp(t, t_begin, t_end);
    std::size_t lo = 0, hi = steps.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (t <= steps[mid].t0 + steps[mid].h)
        hi = mid;
      else
        lo = mid + 1;
    }
    const OdeStep& s = steps[lo];
    const double th = (t - s.t0) / s.h;
    const double th1 = 1.0 - th;
    std::vector<double> y(s.r1.size());
    for (std::size_t i = 0; i < y.size(); ++i)
      y[i] = s.r1[i] +
             th * (s.r2[i] + th1 * (s.r3[i] + th * (s.r4[i] + th1 * s.r5[i])));
    return y;
  }
};

/// Integrate y' = f(t, y) from t0 to t1 (t1 > t0).
inline OdeSolution integrate_ode(const OdeRhs& rhs, std::vector<double> y,
                                 double t0, double t1,
                                 const OdeOptions& opt = {}) {
  if (!(t1 > t0)) throw NumericError("integrate_ode requires t1 > t0");
  const std::size_t n = y.size();

  // Dormand-Prince coefficients.
  static const double c[7] = {0.0,   1.0 / 5, 3.0 / 10, 4.0 / 5,
                              8.0 / 9, 1.0,     1.0};
  static const double a2[] = {1.0 / 5};
  static const double a3[] = {3.0 / 40, 9.0 / 40};
  static const double a4[] = {44.0 / 45, -56.0 / 15, 32.0 / 9};
  static const double a5[] = {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561,
                              -212.0 / 729};
  static const double a6[] = {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247,
                              49.0 / 176, -5103.0 / 18656};
  static const double a7[] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192,
                              -2187.0 / 6784, 11.0 / 84};
  static const double er[] = {71.0 / 57600,      0.0, -71.0 / 16695,
                              71.0 / 1920,       -17253.0 / 339200,
                              22.0 / 525,        -1.0 / 40};
  static const double d[] = {-12715105075.0 / 11282082432.0,
                             0.0,
                             87487479700.0 / 32700410799.0,
                             -10690763975.0 / 1880347072.0,
                             701980252875.0 / 199316789632.0,
                             -1453857185.0 / 822651844.0,
                             69997945.0 / 29380423.0};
  static const double* arows[6] = {a2, a3, a4, a5, a6, a7};

  OdeSolution sol;
  sol.t_begin = t0;
  sol.t_end = t1;

  std::array<std::vector<double>, 7> k;
  for (auto& ki : k) ki.assign(n, 0.0);
  std::vector<double> ytmp(n), y1(n), err(n);

  double t = t0;
  double h = std::min({(t1 - t0) / 50.0, 0.1, t1 - t0});

  auto guard_violated = [&](double tt, const std::vector<double>& yy,
                            std::string* which) {
    for (const auto& g : opt.guards)
      if (g.value(tt, yy) <= 0.0) {
        if (which) *which = g.name;
        return true;
      }
    return false;
  };

  {
    std::string which;
    if (guard_violated(t0, y, &which))
      throw NumericError("guard '" + which + "' violated at initial time");
  }

  std::size_t nsteps = 0;
  while (t < t1) {
    if (++nsteps > opt.max_steps)
      throw NumericError("integrator exceeded maximum step count");
    h = std::min(h, t1 - t);
    if (h < 1e-13 * (t1 - t0))
      throw NumericError("integrator step size collapsed at t=" +
                         std::to_string(t));

    rhs(t, y, k[0]);
    for (int stage = 1; stage < 7; ++stage) {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < stage; ++j) acc += arows[stage - 1][j] * k[j][i];
        ytmp[i] = y[i] + h * acc;
      }
      rhs(t + c[stage] * h, ytmp, k[stage]);
    }
    // Fifth-order solution is the stage-7 argument (FSAL layout).
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < 6; ++j) acc += a7[j] * k[j][i];
      y1[i] = y[i] + h * acc;
    }
    double errnorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double e = 0.0;
      for (int j = 0; j < 7; ++j) e += er[j] * k[j][i];
      e *= h;
      const double sc =
          opt.abs_tol +
          opt.rel_tol * std::max(std::fabs(y[i]), std::fabs(y1[i]));
      errnorm += (e / sc) * (e / sc);
    }
    errnorm = std::sqrt(errnorm / static_cast<double>(n));

    if (errnorm > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(errnorm, -0.2));
      continue;
    }

    // Accepted: store dense coefficients.
    OdeStep step;
    step.t0 = t;
    step.h = h;
    step.r1 = y;
    step.r2.resize(n);
    step.r3.resize(n);
    step.r4.resize(n);
    step.r5.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ydiff = y1[i] - y[i];
      const double bspl = h * k[0][i] - ydiff;
      step.r2[i] = ydiff;
      step.r3[i] = bspl;
      step.r4[i] = ydiff - h * k[6][i] - bspl;
      double acc = 0.0;
      for (int j = 0; j < 7; ++j) acc += d[j] * k[j][i];
      step.r5[i] = h * acc;
    }
    sol.steps.push_back(std::move(step));

    // Guard check at midpoint and endpoint; bisect to the crossing.
    std::string which;
    double bad_theta = -1.0;
    if (guard_violated(t + 0.5 * h, sol.eval(t + 0.5 * h), &which))
      bad_theta = 0.5;
    else if (guard_violated(t + h, y1, &which))
      bad_theta = 1.0;
    if (bad_theta > 0.0) {
      double lo = 0.0, hi = bad_theta;
      for (int it = 0; it < 80 && (hi - lo) > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (guard_violated(t + mid * h, sol.eval(t + mid * h), nullptr))
          hi = mid;
        else
          lo = mid;
      }
      sol.t_end = t + lo * h;
      sol.truncated = true;
      sol.truncation_reason = which;
      return sol;
    }

    t += h;
    y = y1;
    if (opt.renormalize) opt.renormalize(y);
    h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(errnorm, 1e-10),
                                                    -0.2)));
  }
  return sol;
}

}  // namespace lagrflow
