// ---------------------------------------------------------------------------
// Family registry, catalog configurations, and the builders that assemble a
// FlowMap from a FamilyConfig.
//
// Every builder follows the same pattern: validate the configuration
// (throwing ConfigError with the offending field path), construct the
// spatial component, construct the time component with exact column jets,
// declare the constant functionals, and hand the result to a shared
// finisher that applies overrides and checks that the volume factor is
// positive over the sample box at t0.
//
// Time-dependent scale factors driven by an ODE use a single right-hand
// side written in second-order jets.  The integrator consumes only the
// value slots; the column assembly calls the same right-hand side twice
// (first with constant jets to obtain y', then with {y, y', 0} to obtain
// y'') so the columns carry exact first and second time derivatives.
// ---------------------------------------------------------------------------

#include "lagrflow/families.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lagrflow/errors.hpp"
#include "lagrflow/ode.hpp"
#include "lagrflow/rotation.hpp"

namespace lagrflow {
namespace {

using nlohmann::json;
using Mat3J = Mat3x<Jet2>;

// ---------------------------------------------------------------------------
// Configuration access
// ---------------------------------------------------------------------------

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw ConfigError(field + ": " + msg);
}

double cval(const FamilyConfig& cfg, const std::string& name) {
  const auto it = cfg.constants.find(name);
  if (it == cfg.constants.end()) fail("constants." + name, "missing");
  if (!std::isfinite(it->second)) fail("constants." + name, "must be finite");
  return it->second;
}

double cval_or(const FamilyConfig& cfg, const std::string& name,
               double fallback) {
  const auto it = cfg.constants.find(name);
  if (it == cfg.constants.end()) return fallback;
  if (!std::isfinite(it->second)) fail("constants." + name, "must be finite");
  return it->second;
}

double ival_or(const FamilyConfig& cfg, const std::string& name,
               double fallback) {
  const auto it = cfg.initial.find(name);
  if (it == cfg.initial.end()) return fallback;
  if (!std::isfinite(it->second)) fail("initial." + name, "must be finite");
  return it->second;
}

const std::string& ftext(const FamilyConfig& cfg, const std::string& name) {
  const auto it = cfg.functions.find(name);
  if (it == cfg.functions.end()) fail("functions." + name, "missing");
  return it->second;
}

std::string ftext_or(const FamilyConfig& cfg, const std::string& name,
                     const std::string& fallback) {
  const auto it = cfg.functions.find(name);
  return it == cfg.functions.end() ? fallback : it->second;
}

ExprPtr fexpr(const FamilyConfig& cfg, const std::string& name) {
  const std::string& text = ftext(cfg, name);
  try {
    return parse_expr(text, standard_variables());
  } catch (const ParseError& e) {
    fail("functions." + name, e.what());
  }
}

/// Parse a function descriptor that may depend on t only.
ExprPtr time_expr(const FamilyConfig& cfg, const std::string& name) {
  ExprPtr e = fexpr(cfg, name);
  for (const char* v : {"z1", "z2", "z3", "s"}) {
    if (references(e, v))
      fail("functions." + name,
           std::string("must depend on t only (references ") + v + ")");
  }
  return e;
}

Jet2 jet_at(const ExprPtr& e, double t) {
  Env<Jet2> env;
  env.emplace("t", Jet2::variable(t));
  return eval(e, env);
}

/// Jet of the derivative of a quantity whose jets are already exact.
constexpr Jet2 shift(const Jet2& j) { return Jet2{j.d1, j.d2, 0.0}; }

// ---------------------------------------------------------------------------
// State jets for ODE-driven scale factors
// ---------------------------------------------------------------------------

template <std::size_t N>
using JetRhs =
    std::function<std::array<Jet2, N>(double, const std::array<Jet2, N>&)>;

template <std::size_t N>
OdeRhs value_rhs(const JetRhs<N>& rhs) {
  return [rhs](double t, const std::vector<double>& y,
               std::vector<double>& dy) {
    std::array<Jet2, N> yj{};
    for (std::size_t i = 0; i < N; ++i) yj[i] = Jet2(y[i]);
    const std::array<Jet2, N> f = rhs(t, yj);
    dy.resize(N);
    for (std::size_t i = 0; i < N; ++i) dy[i] = f[i].v;
  };
}

/// Full second-order jets {y, y', y''} of the state at time t, recovered
/// from the dense solution and two evaluations of the jet right-hand side.
template <std::size_t N>
std::array<Jet2, N> state_jets(const OdeSolution& sol, double t,
                               const JetRhs<N>& rhs) {
  const std::vector<double> y = sol.eval(t);
  std::array<Jet2, N> y0{};
  for (std::size_t i = 0; i < N; ++i) y0[i] = Jet2(y[i]);
  const std::array<Jet2, N> f0 = rhs(t, y0);
  std::array<Jet2, N> y1{};
  for (std::size_t i = 0; i < N; ++i) y1[i] = Jet2{y[i], f0[i].v, 0.0};
  const std::array<Jet2, N> f1 = rhs(t, y1);
  std::array<Jet2, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = Jet2{y[i], f1[i].v, f1[i].d1};
  return out;
}

/// Guard that keeps a time-only expression away from zero without letting it
/// change sign.
OdeGuard expr_sign_guard(const std::string& name, const ExprPtr& e,
                         double t0) {
  const double sgn = jet_at(e, t0).v >= 0.0 ? 1.0 : -1.0;
  return OdeGuard{name, [e, sgn](double t, const std::vector<double>&) {
                    return sgn * jet_at(e, t).v - 1e-6;
                  }};
}

// ---------------------------------------------------------------------------
// Declared functionals
// ---------------------------------------------------------------------------

PairFunctional qf(std::string name, int i, int j, double value) {
  PairFunctional f;
  f.name = std::move(name);
  f.terms = {{i, j, 1.0}};
  f.value = value;
  return f;
}

TripleFunctional ef(std::string name, int i, int j, int k, double value) {
  TripleFunctional f;
  f.name = std::move(name);
  f.terms = {{i, j, k, 1.0}};
  f.value = value;
  return f;
}

void add_zero_pairs(TimeComponent& tc,
                    std::initializer_list<std::pair<int, int>> pairs) {
  for (const auto& p : pairs) {
    tc.declared_pairs.push_back(
        qf("q" + std::to_string(p.first) + std::to_string(p.second), p.first,
           p.second, 0.0));
  }
}

void add_zero_triples(TimeComponent& tc,
                      std::initializer_list<std::array<int, 3>> triples) {
  for (const auto& t : triples) {
    tc.declared_triples.push_back(
        ef("e" + std::to_string(t[0]) + std::to_string(t[1]) +
               std::to_string(t[2]),
           t[0], t[1], t[2], 0.0));
  }
}

void declare_pair_measured(TimeComponent& tc, std::string name,
                           std::vector<PairFunctionalTerm> terms) {
  PairFunctional f;
  f.name = std::move(name);
  f.terms = std::move(terms);
  f.value = tc.pair_value(tc.t0, f);
  tc.declared_pairs.push_back(std::move(f));
}

void declare_triple_measured(TimeComponent& tc, std::string name,
                             std::vector<TripleFunctionalTerm> terms) {
  TripleFunctional f;
  f.name = std::move(name);
  f.terms = std::move(terms);
  f.value = tc.triple_value(tc.t0, f);
  tc.declared_triples.push_back(std::move(f));
}

double declared_value(const TimeComponent& tc, const std::string& name) {
  for (const auto& f : tc.declared_pairs)
    if (f.name == name) return f.value;
  for (const auto& f : tc.declared_triples)
    if (f.name == name) return f.value;
  throw NumericError("internal: no declared functional named " + name);
}

// ---------------------------------------------------------------------------
// Shared assembly pieces
// ---------------------------------------------------------------------------

Vec3J apply_rot(const Mat33T<Jet2>& R, const Vec3J& x) {
  Vec3J out{};
  for (int r = 0; r < 3; ++r)
    out[r] = R[r][0] * x[0] + R[r][1] * x[1] + R[r][2] * x[2];
  return out;
}

Mat33T<Jet2> rot_z_jets(const Jet2& ang) {
  const Jet2 c = cos(ang), s = sin(ang);
  Mat33T<Jet2> R{};
  R[0][0] = c;
  R[0][1] = -s;
  R[1][0] = s;
  R[1][1] = c;
  R[2][2] = Jet2(1.0);
  return R;
}

/// Parallel-column ladder shared by the three m=6 parabolic branches:
/// A1 = l1 A2 and A4 = l2 A5, with A6 mixing A5 and A3.
Mat3J parabolic_columns(const Jet2& l1, const Jet2& l2, const Jet2& b12,
                        const Jet2& b13, const Jet2& b15, const Jet2& b23,
                        const Jet2& b25) {
  const Vec3J a2{b12, Jet2(0.0), Jet2(0.0)};
  const Vec3J a5{b15, b25, Jet2(0.0)};
  const Vec3J a3{b13, b23, -(1.0 / (b12 * b25))};
  Mat3J A;
  A.cols = 6;
  A[0] = l1 * a2;
  A[1] = a2;
  A[2] = a3;
  A[3] = l2 * a5;
  A[4] = a5;
  A[5] = l1 * a5 + (1.0 / l2) * a3;
  return A;
}

void set_horizon(TimeComponent& tc, const FamilyConfig& cfg) {
  tc.family = cfg.family;
  tc.t0 = cfg.t0;
  tc.t1 = cfg.t1;
  tc.t_end = cfg.t1;
  tc.truncated = false;
}

void adopt_truncation(TimeComponent& tc, const OdeSolution& sol) {
  tc.truncated = sol.truncated;
  tc.t_end = sol.t_end;
  tc.truncation_reason = sol.truncation_reason;
}

void apply_overrides(FlowMap& fm, const FamilyConfig& cfg) {
  for (const auto& [name, value] : cfg.declare_override) {
    bool found = false;
    for (auto& f : fm.tc.declared_pairs) {
      if (f.name == name) {
        f.value = value;
        found = true;
      }
    }
    for (auto& f : fm.tc.declared_triples) {
      if (f.name == name) {
        f.value = value;
        found = true;
      }
    }
    if (!found)
      fail("declare_override." + name, "no declared functional with this name");
  }
}

/// Copy sampling parameters, check the volume factor on a coarse lattice at
/// t0 (the map must preserve orientation on the sample box), then apply any
/// declared-value overrides.
FlowMap finish(FlowMap fm, const FamilyConfig& cfg) {
  fm.box_lo = cfg.box_lo;
  fm.box_hi = cfg.box_hi;
  fm.grid_n = cfg.grid_n;
  fm.grid_t = cfg.grid_t;
  fm.seed = cfg.seed;

  const int n = 4;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        Vec3 z{};
        const int idx[3] = {i, j, k};
        for (int a = 0; a < 3; ++a) {
          z[a] = cfg.box_lo[a] +
                 (cfg.box_hi[a] - cfg.box_lo[a]) * idx[a] / double(n - 1);
        }
        bool excluded = false;
        for (const ExprPtr& e : fm.exclusions) {
          Env<double> env{{"z1", z[0]}, {"z2", z[1]}, {"z3", z[2]}};
          if (std::abs(eval(e, env)) < 1e-3) excluded = true;
        }
        if (excluded) continue;
        const SpatialSample s = fm.v.sample(z);
        const double a0 = fm.alpha(s, cfg.t0);
        if (!(a0 > 0.0)) {
          std::ostringstream os;
          os << "domain: volume factor is not positive at t0 (alpha = " << a0
             << " at z = (" << z[0] << ", " << z[1] << ", " << z[2] << "))";
          throw ConfigError(os.str());
        }
      }
    }
  }

  apply_overrides(fm, cfg);
  return fm;
}

// ---------------------------------------------------------------------------
// m = 3: rigid rotation times a volume-preserving triangular profile
// ---------------------------------------------------------------------------

FlowMap build_m3(const FamilyConfig& cfg) {
  const double c12 = cval(cfg, "c12");
  const double c13 = cval(cfg, "c13");
  const double c23 = cval(cfg, "c23");
  const ExprPtr b11e = time_expr(cfg, "b11");
  const ExprPtr b22e = time_expr(cfg, "b22");
  const ExprPtr w1e = time_expr(cfg, "w1");
  const ExprPtr w2e = time_expr(cfg, "w2");
  const ExprPtr w3e = time_expr(cfg, "w3");
  if (std::abs(jet_at(b11e, cfg.t0).v) < 1e-9)
    fail("functions.b11", "must be nonzero at t0");
  if (std::abs(jet_at(b22e, cfg.t0).v) < 1e-9)
    fail("functions.b22", "must be nonzero at t0");

  // States: the strictly-upper profile entries (b12, b13, b23).  The
  // diagonal is (b11, b22, 1/(b11 b22)); each declared pair value pins one
  // off-diagonal rate.
  const JetRhs<3> rhs = [=](double t,
                            const std::array<Jet2, 3>& y) -> std::array<Jet2, 3> {
    const Jet2 b11 = jet_at(b11e, t), b22 = jet_at(b22e, t);
    const Jet2 w1 = jet_at(w1e, t), w2 = jet_at(w2e, t), w3 = jet_at(w3e, t);
    const Jet2 b33 = 1.0 / (b11 * b22);
    const Jet2 db12 = (y[0] * shift(b11) + w3 * b11 * b22 - c12) / b11;
    const Jet2 db13 =
        (y[1] * shift(b11) - w2 * b11 * b33 + w3 * b11 * y[2] - c13) / b11;
    const Jet2 axis =
        w1 * b22 * b33 - w2 * y[0] * b33 + w3 * (y[0] * y[2] - b22 * y[1]);
    const Jet2 db23 =
        (axis + db12 * y[1] + shift(b22) * y[2] - db13 * y[0] - c23) / b22;
    return {db12, db13, db23};
  };

  OdeOptions opt;
  opt.guards.push_back(expr_sign_guard("b11", b11e, cfg.t0));
  opt.guards.push_back(expr_sign_guard("b22", b22e, cfg.t0));
  const OdeSolution sol = integrate_ode(
      value_rhs<3>(rhs),
      {ival_or(cfg, "b12", 0.0), ival_or(cfg, "b13", 0.0),
       ival_or(cfg, "b23", 0.0)},
      cfg.t0, cfg.t1, opt);

  const auto rate = [w1e, w2e, w3e](double t) -> Vec3J {
    return {jet_at(w1e, t), jet_at(w2e, t), jet_at(w3e, t)};
  };
  const AttitudeTrajectory att =
      integrate_attitude(rate, {1.0, 0.0, 0.0, 0.0}, cfg.t0, cfg.t1);

  TimeComponent tc;
  set_horizon(tc, cfg);
  tc.m = 3;
  adopt_truncation(tc, sol);
  tc.columns = [b11e, b22e, sol, att, rhs](double t) {
    const std::array<Jet2, 3> y = state_jets<3>(sol, t, rhs);
    const Jet2 b11 = jet_at(b11e, t), b22 = jet_at(b22e, t);
    const Jet2 b33 = 1.0 / (b11 * b22);
    const Mat33T<Jet2> R = rotation_matrix(att.eval(t));
    Mat3J A;
    A.cols = 3;
    A[0] = apply_rot(R, {b11, Jet2(0.0), Jet2(0.0)});
    A[1] = apply_rot(R, {y[0], b22, Jet2(0.0)});
    A[2] = apply_rot(R, {y[1], y[2], b33});
    return A;
  };
  tc.declared_pairs = {qf("q12", 1, 2, c12), qf("q13", 1, 3, c13),
                       qf("q23", 2, 3, c23)};
  tc.declared_triples = {ef("e123", 1, 2, 3, 1.0)};

  FlowMap fm;
  fm.family = cfg.family;
  fm.m = 3;
  fm.v = spatial_kirchhoff();
  fm.tc = std::move(tc);
  fm.has_closed_invariant = true;
  fm.closed_invariant = [c12, c13, c23](const SpatialSample&) {
    return Vec3{c23, -c13, c12};
  };
  return finish(std::move(fm), cfg);
}

// ---------------------------------------------------------------------------
// m = 4: rotating triangular profile with one graph component
// ---------------------------------------------------------------------------

FlowMap build_m4(const FamilyConfig& cfg) {
  const double c12 = cval(cfg, "c12"), c13 = cval(cfg, "c13");
  const double c14 = cval(cfg, "c14"), c23 = cval(cfg, "c23");
  const double c24 = cval(cfg, "c24"), c34 = cval(cfg, "c34");
  if (std::abs(c14) < 1e-9) fail("constants.c14", "must be nonzero");
  const ExprPtr the = time_expr(cfg, "theta");
  const ExprPtr b11e = time_expr(cfg, "b11");
  const ExprPtr b22e = time_expr(cfg, "b22");
  if (std::abs(jet_at(b11e, cfg.t0).v) < 1e-9)
    fail("functions.b11", "must be nonzero at t0");
  if (std::abs(jet_at(b22e, cfg.t0).v) < 1e-9)
    fail("functions.b22", "must be nonzero at t0");

  // States (b14, b23); the remaining off-diagonal entries follow
  // algebraically from the declared pair values against column 4.
  const JetRhs<2> rhs = [=](double t,
                            const std::array<Jet2, 2>& y) -> std::array<Jet2, 2> {
    const Jet2 b11 = jet_at(b11e, t), b22 = jet_at(b22e, t);
    const Jet2 th = jet_at(the, t);
    const Jet2 b33 = 1.0 / (b11 * b22);
    const Jet2 db14 = (shift(b11) * y[0] - c14) / b11;
    const Jet2 b12 = (c24 * b11 + c12 * y[0]) / c14;
    const Jet2 b13 = (c34 * b11 + c13 * y[0]) / c14;
    const Jet2 db12 = (c24 * shift(b11) + c12 * db14) / c14;
    const Jet2 db13 = (c34 * shift(b11) + c13 * db14) / c14;
    const Jet2 db23 = (2.0 * shift(th) * b22 * b33 + db12 * b13 +
                       shift(b22) * y[1] - db13 * b12 - c23) /
                      b22;
    return {db14, db23};
  };

  OdeOptions opt;
  opt.guards.push_back(expr_sign_guard("b11", b11e, cfg.t0));
  opt.guards.push_back(expr_sign_guard("b22", b22e, cfg.t0));
  const OdeSolution sol = integrate_ode(
      value_rhs<2>(rhs),
      {ival_or(cfg, "b14", 0.0), ival_or(cfg, "b23", 0.0)}, cfg.t0, cfg.t1,
      opt);

  TimeComponent tc;
  set_horizon(tc, cfg);
  tc.m = 4;
  adopt_truncation(tc, sol);
  tc.columns = [=](double t) {
    const std::array<Jet2, 2> y = state_jets<2>(sol, t, rhs);
    const Jet2 b11 = jet_at(b11e, t), b22 = jet_at(b22e, t);
    const Jet2 th = jet_at(the, t);
    const Jet2 b33 = 1.0 / (b11 * b22);
    const Jet2 b12 = (c24 * b11 + c12 * y[0]) / c14;
    const Jet2 b13 = (c34 * b11 + c13 * y[0]) / c14;
    const Jet2 half = 0.5 * th;
    const QuatJ a{cos(half), sin(half), Jet2(0.0), Jet2(0.0)};
    const Mat33T<Jet2> R = rotation_matrix(a);
    Mat3J A;
    A.cols = 4;
    A[0] = apply_rot(R, {b11, Jet2(0.0), Jet2(0.0)});
    A[1] = apply_rot(R, {b12, b22, Jet2(0.0)});
    A[2] = apply_rot(R, {b13, y[1], b33});
    A[3] = apply_rot(R, {y[0], Jet2(0.0), Jet2(0.0)});
    return A;
  };
  tc.declared_pairs = {qf("q12", 1, 2, c12), qf("q13", 1, 3, c13),
                       qf("q14", 1, 4, c14), qf("q23", 2, 3, c23),
                       qf("q24", 2, 4, c24), qf("q34", 3, 4, c34)};
  tc.declared_triples = {ef("e123", 1, 2, 3, 1.0), ef("e124", 1, 2, 4, 0.0),
                         ef("e134", 1, 3, 4, 0.0)};

  FlowMap fm;
  fm.family = cfg.family;
  fm.m = 4;
  fm.v = spatial_graph4(fexpr(cfg, "f"));
  fm.tc = std::move(tc);
  fm.has_closed_invariant = true;
  fm.closed_invariant = [=](const SpatialSample& s) {
    const double fy = s.dv[3][1], fz = s.dv[3][2];
    return Vec3{c23 + c24 * fz - c34 * fy, -c13 - c14 * fz, c12 + c14 * fy};
  };
  return finish(std::move(fm), cfg);
}

// ---------------------------------------------------------------------------
// m = 5 elliptic: rotating planar pair over an anti-CR descriptor
// ---------------------------------------------------------------------------

FlowMap build_m5_elliptic(const FamilyConfig& cfg) {
  const double c12 = cval(cfg, "c12");
  if (std::abs(c12) < 1e-9) fail("constants.c12", "must be nonzero");
  const ExprPtr b11e = time_expr(cfg, "b11");
  if (std::abs(jet_at(b11e, cfg.t0).v) < 1e-9)
    fail("functions.b11", "must be nonzero at t0");
  const double theta0 = ival_or(cfg, "theta", 0.0);

  AntiCrPair pair;
  try {
    pair = build_anti_cr_pair(ftext(cfg, "w"), ftext_or(cfg, "extra1", ""),
                              ftext_or(cfg, "extra2", ""));
  } catch (const ParseError& e) {
    fail("functions.w", e.what());
  } catch (const ConfigError& e) {
    fail("functions.w", e.what());
  }

  const JetRhs<1> rhs = [=](double t,
                            const std::array<Jet2, 1>&) -> std::array<Jet2, 1> {
    const Jet2 b11 = jet_at(b11e, t);
    return {-(c12 / (b11 * b11))};
  };
  OdeOptions opt;
  opt.guards.push_back(expr_sign_guard("b11", b11e, cfg.t0));
  const OdeSolution sol =
      integrate_ode(value_rhs<1>(rhs), {theta0}, cfg.t0, cfg.t1, opt);

  TimeComponent tc;
  set_horizon(tc, cfg);
  tc.m = 5;
  adopt_truncation(tc, sol);
  tc.columns = [=](double t) {
    const std::array<Jet2, 1> y = state_jets<1>(sol, t, rhs);
    const Jet2 th = y[0];
    const Jet2 b11 = jet_at(b11e, t);
    const Jet2 binv = 1.0 / (b11 * b11);
    // The pair (A4, A5) carries angle theta; the whole frame counter-rotates
    // with half the swept angle so the planar pair coefficient stays put.
    const Jet2 rho = 0.5 * (theta0 - th);
    const Mat33T<Jet2> R = rot_z_jets(rho);
    const Jet2 c = cos(th), s = sin(th);
    Mat3J A;
    A.cols = 5;
    A[0] = apply_rot(R, {b11, Jet2(0.0), Jet2(0.0)});
    A[1] = apply_rot(R, {Jet2(0.0), b11, Jet2(0.0)});
    A[2] = apply_rot(R, {Jet2(0.0), Jet2(0.0), binv});
    A[3] = apply_rot(R, {b11 * c, b11 * s, Jet2(0.0)});
    A[4] = apply_rot(R, {-(b11 * s), b11 * c, Jet2(0.0)});
    return A;
  };
  tc.declared_pairs = {qf("q12", 1, 2, c12), qf("q45", 4, 5, -c12)};
  add_zero_pairs(tc, {{1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5},
                      {3, 4}, {3, 5}});
  tc.declared_triples = {ef("e123", 1, 2, 3, 1.0), ef("e345", 3, 4, 5, 1.0)};
  add_zero_triples(tc, {{1, 2, 4}, {1, 2, 5}, {1, 4, 5}, {2, 4, 5}});
  {
    TripleFunctional f;
    f.name = "e134-e235";
    f.terms = {{1, 3, 4, 1.0}, {2, 3, 5, -1.0}};
    f.value = 0.0;
    tc.declared_triples.push_back(std::move(f));
    TripleFunctional g;
    g.name = "e135+e234";
    g.terms = {{1, 3, 5, 1.0}, {2, 3, 4, 1.0}};
    g.value = 0.0;
    tc.declared_triples.push_back(std::move(g));
  }

  FlowMap fm;
  fm.family = cfg.family;
  fm.m = 5;
  fm.v = spatial_elliptic5(pair);
  fm.tc = std::move(tc);
  fm.has_closed_invariant = true;
  fm.closed_invariant = [c12](const SpatialSample& s) {
    const double a = s.dv[3][0], b = s.dv[3][1];
    const double c = s.dv[3][2], e = s.dv[4][2];
    return Vec3{c12 * (-a * c - b * e), c12 * (a * e - b * c),
                c12 * (a * a + b * b + 1.0)};
  };
  return finish(std::move(fm), cfg);
}

// ---------------------------------------------------------------------------
// m = 5 hyperbolic: axis stretching with two transported graph components
// ---------------------------------------------------------------------------

FlowMap build_m5_hyperbolic(const FamilyConfig& cfg) {
  const double c15 = cval(cfg, "c15");
  if (std::abs(c15) < 1e-9) fail("constants.c15", "must be nonzero");
  const ExprPtr b11e = time_expr(cfg, "b11");
  if (std::abs(jet_at(b11e, cfg.t0).v) < 1e-9)
    fail("functions.b11", "must be nonzero at t0");
  const double ell0 = ival_or(cfg, "ell", 1.0);
  if (std::abs(ell0) < 1e-6) fail("initial.ell", "must be nonzero");

  const JetRhs<1> rhs = [=](double t,
                            const std::array<Jet2, 1>&) -> std::array<Jet2, 1> {
    const Jet2 b11 = jet_at(b11e, t);
    return {-(c15 / (b11 * b11))};
  };
  OdeOptions opt;
  opt.guards.push_back(expr_sign_guard("b11", b11e, cfg.t0));
  const double lsgn = ell0 >= 0.0 ? 1.0 : -1.0;
  opt.guards.push_back({"ell", [lsgn](double, const std::vector<double>& y) {
                          return lsgn * y[0] - 1e-6;
                        }});
  const OdeSolution sol =
      integrate_ode(value_rhs<1>(rhs), {ell0}, cfg.t0, cfg.t1, opt);

  TimeComponent tc;
  set_horizon(tc, cfg);
  tc.m = 5;
  adopt_truncation(tc, sol);
  tc.columns = [=](double t) {
    const std::array<Jet2, 1> y = state_jets<1>(sol, t, rhs);
    const Jet2 ell = y[0];
    const Jet2 b11 = jet_at(b11e, t);
    Mat3J A;
    A.cols = 5;
    A[0] = {b11, Jet2(0.0), Jet2(0.0)};
    A[1] = {Jet2(0.0), ell * b11, Jet2(0.0)};
    A[2] = {Jet2(0.0), Jet2(0.0), 1.0 / (ell * b11 * b11)};
    A[3] = {Jet2(0.0), b11, Jet2(0.0)};
    A[4] = {ell * b11, Jet2(0.0), Jet2(0.0)};
    return A;
  };
  tc.declared_pairs = {qf("q15", 1, 5, c15), qf("q24", 2, 4, -c15)};
  add_zero_pairs(tc, {{1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 5}, {3, 4},
                      {3, 5}, {4, 5}});
  tc.declared_triples = {ef("e123", 1, 2, 3, 1.0), ef("e345", 3, 4, 5, -1.0)};
  add_zero_triples(tc, {{1, 2, 4}, {1, 2, 5}, {1, 3, 5}, {1, 4, 5},
                        {2, 3, 4}, {2, 4, 5}});

  FlowMap fm;
  fm.family = cfg.family;
  fm.m = 5;
  fm.v = spatial_hyperbolic5(fexpr(cfg, "f1"), fexpr(cfg, "f2"));
  fm.tc = std::move(tc);
  fm.has_closed_invariant = true;
  fm.closed_invariant = [c15](const SpatialSample& s) {
    return Vec3{-c15 * s.dv[3][2], -c15 * s.dv[4][2],
                c15 * (s.dv[3][0] + s.dv[4][1])};
  };
  return finish(std::move(fm), cfg);
}

// ---------------------------------------------------------------------------
// m = 5 parabolic: shear pair sharing an axis
// ---------------------------------------------------------------------------

FlowMap build_m5_parabolic(const FamilyConfig& cfg) {
  const double c12 = cval(cfg, "c12");
  if (std::abs(c12) < 1e-9) fail("constants.c12", "must be nonzero");
  const ExprPtr b12e = time_expr(cfg, "b12");
  if (std::abs(jet_at(b12e, cfg.t0).v) < 1e-9)
    fail("functions.b12", "must be nonzero at t0");
  const double ell0 = ival_or(cfg, "ell", 1.0);

  const JetRhs<1> rhs = [=](double t,
                            const std::array<Jet2, 1>&) -> std::array<Jet2, 1> {
    const Jet2 b12 = jet_at(b12e, t);
    return {c12 / (b12 * b12)};
  };
  OdeOptions opt;
  opt.guards.push_back(expr_sign_guard("b12", b12e, cfg.t0));
  const OdeSolution sol =
      integrate_ode(value_rhs<1>(rhs), {ell0}, cfg.t0, cfg.t1, opt);

  TimeComponent tc;
  set_horizon(tc, cfg);
  tc.m = 5;
  adopt_truncation(tc, sol);
  tc.columns = [=](double t) {
    const std::array<Jet2, 1> y = state_jets<1>(sol, t, rhs);
    const Jet2 ell = y[0];
    const Jet2 b12 = jet_at(b12e, t);
    Mat3J A;
    A.cols = 5;
    A[0] = {ell * b12, Jet2(0.0), Jet2(0.0)};
    A[1] = {b12, Jet2(0.0), Jet2(0.0)};
    A[2] = {Jet2(0.0), 1.0 / (b12 * b12), Jet2(0.0)};
    A[3] = {Jet2(0.0), Jet2(0.0), b12};
    A[4] = {Jet2(0.0), Jet2(0.0), ell * b12};
    return A;
  };
  tc.declared_pairs = {qf("q12", 1, 2, c12), qf("q45", 4, 5, -c12)};
  add_zero_pairs(tc, {{1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5},
                      {3, 4}, {3, 5}});
  tc.declared_triples = {ef("e234", 2, 3, 4, 1.0)};
  add_zero_triples(tc, {{1, 2, 3}, {1, 2, 4}, {1, 2, 5}, {1, 4, 5},
                        {2, 4, 5}, {3, 4, 5}});
  {
    TripleFunctional f;
    f.name = "e235-e134";
    f.terms = {{2, 3, 5, 1.0}, {1, 3, 4, -1.0}};
    f.value = 0.0;
    tc.declared_triples.push_back(std::move(f));
  }

  FlowMap fm;
  fm.family = cfg.family;
  fm.m = 5;
  fm.v = spatial_parabolic5(fexpr(cfg, "f1"), fexpr(cfg, "f2"));
  fm.tc = std::move(tc);
  fm.has_closed_invariant = true;
  fm.closed_invariant = [c12](const SpatialSample& s) {
    const double v4x = s.dv[3][0], v4z = s.dv[3][2];
    const double v5x = s.dv[4][0], v5z = s.dv[4][2];
    return Vec3{-c12 * v5x * v5z, c12 * (v4x * v5z - v4z * v5x),
                c12 * (1.0 + v5x * v5x)};
  };
  return finish(std::move(fm), cfg);
}

// ---------------------------------------------------------------------------
// m = 6 hyperbolic, branch I: coupled scale factors with a quadratic lock
// ---------------------------------------------------------------------------

FlowMap build_m6_hyperbolic_i(const FamilyConfig& cfg) {
  const double c16 = cval(cfg, "c16"), c24 = cval(cfg, "c24");
  const double c35 = cval(cfg, "c35");
  if (!(c16 > 0.0)) fail("constants.c16", "must be positive");
  if (!(c24 > 0.0)) fail("constants.c24", "must be positive");
  if (!(c35 < 0.0)) fail("constants.c35", "must be negative");
  const ExprPtr b11e = time_expr(cfg, "b11");
  if (std::abs(jet_at(b11e, cfg.t0).v) < 1e-9)
    fail("functions.b11", "must be nonzero at t0");
  const double l10 = ival_or(cfg, "ell1", 1.0);
  const double l20 = ival_or(cfg, "ell2", 1.0);
  if (!(l10 > 0.0)) fail("initial.ell1", "must be positive");
  if (!(l20 > 0.0)) fail("initial.ell2", "must be positive");

  // The middle squared scale x = b22^2 is the positive root of
  //   c35 b11^4 l1^2 l2^2 x^2 + c16 l2 x + c24 b11^2 l1 = 0,
  // which locks the third declared pair value to c35.
  const auto x_of = [=](const Jet2& l1, const Jet2& l2, const Jet2& b11) {
    const Jet2 qa = c35 * pow_int(b11, 4) * l1 * l1 * l2 * l2;
    const Jet2 qb = c16 * l2;
    const Jet2 qc = c24 * b11 * b11 * l1;
    return (-qb - sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
  };
  const JetRhs<2> rhs = [=](double t,
                            const std::array<Jet2, 2>& y) -> std::array<Jet2, 2> {
    const Jet2 b11 = jet_at(b11e, t);
    const Jet2 x = x_of(y[0], y[1], b11);
    return {-(c16 / (b11 * b11)), -(c24 / x)};
  };

  OdeOptions opt;
  opt.guards.push_back(expr_sign_guard("b11", b11e, cfg.t0));
  opt.guards.push_back({"ell1", [](double, const std::vector<double>& y) {
                          return y[0] - 1e-6;
                        }});
  opt.guards.push_back({"ell2", [](double, const std::vector<double>& y) {
                          return y[1] - 1e-6;
                        }});
  const OdeSolution sol =
      integrate_ode(value_rhs<2>(rhs), {l10, l20}, cfg.t0, cfg.t1, opt);

  TimeComponent tc;
  set_horizon(tc, cfg);
  tc.m = 6;
  adopt_truncation(tc, sol);
  tc.columns = [=](double t) {
    const std::array<Jet2, 2> y = state_jets<2>(sol, t, rhs);
    const Jet2 l1 = y[0], l2 = y[1];
    const Jet2 b11 = jet_at(b11e, t);
    const Jet2 b22 = sqrt(x_of(l1, l2, b11));
    const Jet2 w = 1.0 / (b11 * b22);
    Mat3J A;
    A.cols = 6;
    A[0] = {b11, Jet2(0.0), Jet2(0.0)};
    A[1] = {Jet2(0.0), b22, Jet2(0.0)};
    A[2] = {Jet2(0.0), Jet2(0.0), w};
    A[3] = {Jet2(0.0), l2 * b22, Jet2(0.0)};
    A[4] = {Jet2(0.0), Jet2(0.0), w / (l1 * l2)};
    A[5] = {l1 * b11, Jet2(0.0), Jet2(0.0)};
    return A;
  };
  tc.declared_pairs = {qf("q16", 1, 6, c16), qf("q24", 2, 4, c24),
                       qf("q35", 3, 5, c35)};
  add_zero_pairs(tc, {{1, 2}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 5},
                      {2, 6}, {3, 4}, {3, 6}, {4, 5}, {4, 6}, {5, 6}});
  tc.declared_triples = {ef("e123", 1, 2, 3, 1.0), ef("e456", 4, 5, 6, 1.0)};
  add_zero_triples(tc, {{1, 2, 4}, {1, 2, 6}, {1, 3, 5}, {1, 3, 6},
                        {1, 4, 6}, {1, 5, 6}, {2, 3, 4}, {2, 3, 5},
                        {2, 4, 5}, {2, 4, 6}, {3, 4, 5}, {3, 5, 6}});

  FlowMap fm;
  fm.family = cfg.family;
  fm.m = 6;
  fm.v = spatial_axis6(fexpr(cfg, "f1"), fexpr(cfg, "f2"), fexpr(cfg, "f3"));
  fm.tc = std::move(tc);
  fm.has_closed_invariant = true;
  fm.closed_invariant = [=](const SpatialSample& s) {
    return Vec3{-c35 * s.dv[4][1], -c16 * s.dv[5][2], -c24 * s.dv[3][0]};
  };
  return finish(std::move(fm), cfg);
}

// ---------------------------------------------------------------------------
// m = 6 hyperbolic, branch II: one scale factor with cube-root dynamics
// ---------------------------------------------------------------------------

FlowMap build_m6_hyperbolic_ii(const FamilyConfig& cfg) {
  const double k0 = cval(cfg, "k0"), k1 = cval(cfg, "k1");
  const double k2 = cval(cfg, "k2"), k3 = cval(cfg, "k3");
  const double k4 = cval(cfg, "k4"), k5 = cval(cfg, "k5");
  const double m0 = cval(cfg, "m0"), m1 = cval(cfg, "m1");
  for (const auto& [name, value] :
       std::initializer_list<std::pair<const char*, double>>{
           {"k0", k0}, {"k1", k1}, {"k2", k2}, {"m0", m0}, {"m1", m1}}) {
    if (std::abs(value) < 1e-9)
      fail(std::string("constants.") + name, "must be nonzero");
  }
  if (std::abs(k3) < 1e-9 && std::abs(k4) < 1e-9 && std::abs(k5) < 1e-9)
    fail("constants.k3", "k3, k4, k5 must not all vanish");
  const double l10 = ival_or(cfg, "ell1", 1.0);
  if (std::abs(l10) < 1e-6) fail("initial.ell1", "must be nonzero");
  if (std::abs(m1 * l10 + m0) < 1e-6)
    fail("initial.ell1", "m1*ell1 + m0 must be nonzero");

  const JetRhs<1> rhs = [=](double,
                            const std::array<Jet2, 1>& y) -> std::array<Jet2, 1> {
    const Jet2 l1 = y[0];
    const Jet2 u = m1 * l1 + m0;
    return {cbrt(k0 * l1 * l1 * u * u)};
  };

  OdeOptions opt;
  const double s1 = l10 >= 0.0 ? 1.0 : -1.0;
  const double su = (m1 * l10 + m0) >= 0.0 ? 1.0 : -1.0;
  opt.guards.push_back({"ell1", [s1](double, const std::vector<double>& y) {
                          return s1 * y[0] - 1e-6;
                        }});
  opt.guards.push_back(
      {"m1*ell1+m0", [=](double, const std::vector<double>& y) {
         return su * (m1 * y[0] + m0) - 1e-6;
       }});
  const OdeSolution sol =
      integrate_ode(value_rhs<1>(rhs), {l10}, cfg.t0, cfg.t1, opt);

  TimeComponent tc;
  set_horizon(tc, cfg);
  tc.m = 6;
  adopt_truncation(tc, sol);
  tc.columns = [=](double t) {
    const std::array<Jet2, 1> y = state_jets<1>(sol, t, rhs);
    const Jet2 l1 = y[0];
    const Jet2 u = m1 * l1 + m0;
    const Jet2 b11 = cbrt(k1 / (l1 * u));
    const Jet2 b22 = k2 * b11 * u;
    const Jet2 b12 = k3 * b11 * u;
    const Jet2 b13 = k4 * b11 * l1;
    const Jet2 b23 = k5 * b11 * l1;
    const Jet2 l2 = 1.0 / u;
    const Vec3J a1{b11, Jet2(0.0), Jet2(0.0)};
    const Vec3J a2{b12, b22, Jet2(0.0)};
    const Vec3J a3{b13, b23, 1.0 / (b11 * b22)};
    Mat3J A;
    A.cols = 6;
    A[0] = a1;
    A[1] = a2;
    A[2] = a3;
    A[3] = l2 * a2;
    A[4] = (1.0 / (l1 * l2)) * a3;
    A[5] = l1 * a1;
    return A;
  };
  // Every pair coefficient is constant here; record each one at t0.
  for (int i = 1; i <= 6; ++i) {
    for (int j = i + 1; j <= 6; ++j) {
      declare_pair_measured(tc, "q" + std::to_string(i) + std::to_string(j),
                            {{i, j, 1.0}});
    }
  }
  tc.declared_triples = {ef("e123", 1, 2, 3, 1.0), ef("e456", 4, 5, 6, 1.0)};

  FlowMap fm;
  fm.family = cfg.family;
  fm.m = 6;
  fm.v = spatial_axis6(fexpr(cfg, "f1"), fexpr(cfg, "f2"), fexpr(cfg, "f3"));
  fm.tc = std::move(tc);
  return finish(std::move(fm), cfg);
}

// ---------------------------------------------------------------------------
// m = 6 hyperbolic extension: exponential axis pairs, closed form
// ---------------------------------------------------------------------------

FlowMap build_m6_hyperbolic_ext(const FamilyConfig& cfg) {
  const double c = cval(cfg, "c");
  if (std::abs(c) < 1e-9) fail("constants.c", "must be nonzero");

  SpatialComponent sc;
  try {
    sc = hyperbolic_extension_build(fexpr(cfg, "g"), fexpr(cfg, "q1"),
                                    fexpr(cfg, "q"));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("functions.") + e.what());
  }

  TimeComponent tc;
  set_horizon(tc, cfg);
  tc.m = 6;
  tc.columns = [c](double t) {
    const Jet2 T = Jet2::variable(t);
    const Jet2 ep = exp(c * T), em = exp(-(c * T));
    const Jet2 e2p = exp(2.0 * c * T), e2m = exp(-(2.0 * c * T));
    Mat3J A;
    A.cols = 6;
    A[0] = {ep, Jet2(0.0), Jet2(0.0)};
    A[1] = {Jet2(0.0), ep, Jet2(0.0)};
    A[2] = {Jet2(0.0), Jet2(0.0), e2m};
    A[3] = {Jet2(0.0), em, Jet2(0.0)};
    A[4] = {Jet2(0.0), Jet2(0.0), e2p};
    A[5] = {em, Jet2(0.0), Jet2(0.0)};
    return A;
  };
  tc.declared_pairs = {qf("q16", 1, 6, 2.0 * c), qf("q24", 2, 4, 2.0 * c),
                       qf("q35", 3, 5, -4.0 * c)};
  add_zero_pairs(tc, {{1, 2}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 5},
                      {2, 6}, {3, 4}, {3, 6}, {4, 5}, {4, 6}, {5, 6}});
  tc.declared_triples = {ef("e123", 1, 2, 3, 1.0), ef("e456", 4, 5, 6, 1.0)};
  add_zero_triples(tc, {{1, 2, 4}, {1, 2, 6}, {1, 3, 5}, {1, 3, 6},
                        {1, 4, 6}, {1, 5, 6}, {2, 3, 4}, {2, 3, 5},
                        {2, 4, 5}, {2, 4, 6}, {3, 4, 5}, {3, 5, 6}});

  FlowMap fm;
  fm.family = cfg.family;
  fm.m = 6;
  fm.v = std::move(sc);
  fm.tc = std::move(tc);
  fm.has_closed_invariant = true;
  fm.closed_invariant = [c](const SpatialSample& s) {
    const Vec3 g16 = cross(s.dv[0], s.dv[5]);
    const Vec3 g24 = cross(s.dv[1], s.dv[3]);
    const Vec3 g35 = cross(s.dv[2], s.dv[4]);
    Vec3 h{};
    for (int a = 0; a < 3; ++a)
      h[a] = 2.0 * c * (g16[a] + g24[a] - 2.0 * g35[a]);
    return h;
  };
  return finish(std::move(fm), cfg);
}

// ---------------------------------------------------------------------------
// m = 6 elliptic, rotating branches (k < 1 and k = 1)
// ---------------------------------------------------------------------------

/// Shared declared-triple set of the rotating elliptic branches.
void declare_elliptic6_triples(TimeComponent& tc) {
  add_zero_triples(tc, {{1, 2, 3}, {1, 2, 4}, {1, 3, 4}, {2, 3, 4},
                        {1, 5, 6}, {2, 5, 6}, {3, 5, 6}, {4, 5, 6}});
  TripleFunctional f1;
  f1.name = "e136+e235";
  f1.terms = {{1, 3, 6, 1.0}, {2, 3, 5, 1.0}};
  f1.value = 1.0;
  tc.declared_triples.push_back(std::move(f1));
  TripleFunctional f2;
  f2.name = "e145-e246";
  f2.terms = {{1, 4, 5, 1.0}, {2, 4, 6, -1.0}};
  f2.value = -1.0;
  tc.declared_triples.push_back(std::move(f2));
  TripleFunctional f3;
  f3.name = "e135-e236";
  f3.terms = {{1, 3, 5, 1.0}, {2, 3, 6, -1.0}};
  f3.value = 0.0;
  tc.declared_triples.push_back(std::move(f3));
  TripleFunctional f4;
  f4.name = "e146+e245";
  f4.terms = {{1, 4, 6, 1.0}, {2, 4, 5, 1.0}};
  f4.value = 0.0;
  tc.declared_triples.push_back(std::move(f4));
}

AntiCrPair elliptic6_pair(const FamilyConfig& cfg) {
  try {
    return build_anti_cr_pair(ftext(cfg, "w"));
  } catch (const ParseError& e) {
    fail("functions.w", e.what());
  } catch (const ConfigError& e) {
    fail("functions.w", e.what());
  }
}

double elliptic6_gamma(const FamilyConfig& cfg, double c12, double c13,
                       double c14, double k) {
  const double g2 = c12 * c12 - (c12 * k - c14) * (c12 * k - c14) - c13 * c13;
  if (!(g2 > 0.0))
    fail("constants.c12",
         "inadmissible: c12^2 - (c12*k - c14)^2 - c13^2 must be positive");
  const double gs = cval_or(cfg, "gamma_sign", 1.0);
  if (gs != 1.0 && gs != -1.0)
    fail("constants.gamma_sign", "must be +1 or -1");
  return gs * std::sqrt(g2);
}

void check_theta_prime_sign(const FamilyConfig& cfg, double thp0) {
  const auto it = cfg.constants.find("theta_prime_sign");
  if (it == cfg.constants.end()) return;
  const double want = it->second;
  if (want != 1.0 && want != -1.0)
    fail("constants.theta_prime_sign", "must be +1 or -1");
  if (want * thp0 <= 0.0)
    fail("constants.theta_prime_sign",
         "does not match the sign of the constructed angle rate");
}

FlowMap build_m6_elliptic_kne1(const FamilyConfig& cfg) {
  const double c12 = cval(cfg, "c12"), c13 = cval(cfg, "c13");
  const double c14 = cval(cfg, "c14"), k = cval(cfg, "k");
  const double c56 = cval(cfg, "c56");
  if (std::abs(c12) < 1e-9) fail("constants.c12", "must be nonzero");
  if (!(k >= 0.0 && k < 1.0)) fail("constants.k", "must satisfy 0 <= k < 1");
  if (std::abs(c56) < 1e-9) fail("constants.c56", "must be nonzero");
  if (c56 * c12 >= 0.0)
    fail("constants.c56", "must have sign opposite to c12");
  const double gamma = elliptic6_gamma(cfg, c12, c13, c14, k);
  const double gamma2 = gamma * gamma;
  const double D = c14 - c12 * k;
  const double theta0 = ival_or(cfg, "theta", 0.0);

  // Angle dynamics: theta' is the cube root of a strictly-signed profile,
  // and the frame counter-rotates at -gamma / (2 b11^2).
  const auto quartic = [=](const auto& th) {
    const auto u = k * k + 2.0 * k * cos(th) + 1.0;
    return gamma2 * c56 * u * u / (k * cos(th) + 1.0);
  };
  const auto b11sq_of = [=](const Jet2& th, const Jet2& thp) {
    return (D * cos(th) + c13 * sin(th) - c12) / thp;
  };
  const JetRhs<2> rhs = [=](double,
                            const std::array<Jet2, 2>& y) -> std::array<Jet2, 2> {
    const Jet2 thp = cbrt(quartic(y[0]));
    const Jet2 angp = -(gamma / (2.0 * b11sq_of(y[0], thp)));
    return {thp, angp};
  };
  check_theta_prime_sign(cfg, std::cbrt(quartic(Jet2(theta0)).v));

  const OdeSolution sol =
      integrate_ode(value_rhs<2>(rhs), {theta0, 0.0}, cfg.t0, cfg.t1);

  TimeComponent tc;
  set_horizon(tc, cfg);
  tc.m = 6;
  adopt_truncation(tc, sol);
  tc.columns = [=](double t) {
    const std::array<Jet2, 2> y = state_jets<2>(sol, t, rhs);
    const Jet2 th = y[0], ang = y[1];
    const Jet2 u = k * k + 2.0 * k * cos(th) + 1.0;
    const Jet2 thp = cbrt(quartic(th));
    const Jet2 b11 = sqrt(b11sq_of(th, thp));
    const Jet2 b12 = (D * sin(th) - c13 * cos(th)) / (b11 * thp);
    const Jet2 b22 = gamma / (b11 * thp);
    const Jet2 b35 = -(thp / (gamma * u));
    const Jet2 l1 = k + cos(th), l2 = sin(th);
    const Vec3J B1{b11, Jet2(0.0), Jet2(0.0)};
    const Vec3J B2{b12, b22, Jet2(0.0)};
    const Vec3J C{Jet2(0.0), Jet2(0.0), b35};
    const Mat33T<Jet2> R = rot_z_jets(ang);
    Mat3J A;
    A.cols = 6;
    A[0] = apply_rot(R, B1);
    A[1] = apply_rot(R, B2);
    A[2] = apply_rot(R, l1 * B1 + l2 * B2);
    A[3] = apply_rot(R, l1 * B2 + (-l2) * B1);
    A[4] = apply_rot(R, l1 * C);
    A[5] = apply_rot(R, (-l2) * C);
    return A;
  };
  tc.declared_pairs = {qf("q12", 1, 2, c12),
                       qf("q13", 1, 3, c13),
                       qf("q14", 1, 4, c14),
                       qf("q23", 2, 3, c14 - 2.0 * k * c12),
                       qf("q24", 2, 4, -c13),
                       qf("q56", 5, 6, c56)};
  add_zero_pairs(tc, {{1, 5}, {1, 6}, {2, 5}, {2, 6}, {3, 5}, {3, 6},
                      {4, 5}, {4, 6}});
  declare_elliptic6_triples(tc);

  FlowMap fm;
  fm.family = cfg.family;
  fm.m = 6;
  fm.v = spatial_elliptic6(fexpr(cfg, "f1"), elliptic6_pair(cfg));
  fm.tc = std::move(tc);
  fm.has_closed_invariant = true;
  const double q23v = c14 - 2.0 * k * c12;
  fm.closed_invariant = [=](const SpatialSample& s) {
    const double F = s.dv[3][2], a = s.dv[4][0], b = s.dv[4][1];
    return Vec3{q23v + (-c13) * F, -c13 - c14 * F,
                c12 - c56 * (a * a + b * b)};
  };
  return finish(std::move(fm), cfg);
}

FlowMap build_m6_elliptic_keq1(const FamilyConfig& cfg) {
  const double c12 = cval(cfg, "c12"), c13 = cval(cfg, "c13");
  const double c14 = cval(cfg, "c14"), c36 = cval(cfg, "c36");
  const double c46 = cval(cfg, "c46"), c56 = cval(cfg, "c56");
  if (std::abs(c12) < 1e-9) fail("constants.c12", "must be nonzero");
  const double gamma = elliptic6_gamma(cfg, c12, c13, c14, 1.0);
  const double gamma2 = gamma * gamma;
  const double theta0 = ival_or(cfg, "theta", 0.0);

  // Tilted axis direction of the fifth column.  These combinations are the
  // unique choice for which the measured pair coefficients reproduce c13 and
  // c14 exactly; (c14 - c12, c13) then sits on the circle of squared radius
  // c12^2 - gamma^2 that the gamma constraint carves out.
  const double m0 = (c46 * (c14 - 2.0 * c12) + c13 * c36) / 2.0;
  const double m1 = (c13 * c46 - c14 * c36) / 2.0;
  const double denom = c36 * m1 + c46 * m0;
  if (std::abs(denom) < 1e-6)
    fail("constants.c36", "degenerate axis tilt (c36*m1 + c46*m0 vanishes)");
  const double m2 = (gamma2 * c36 * c36 + 4.0 * m0 * m0) / denom;
  const double m3 = (gamma2 * c46 * c46 + 4.0 * m1 * m1) / denom;
  const double m4 = (gamma2 * c36 * c46 - 4.0 * m0 * m1) / denom;
  const double kprof = c56 * gamma2 - denom;
  if (std::abs(kprof) < 1e-9)
    fail("constants.c56", "angle rate vanishes for this configuration");

  const auto cubic = [=](const auto& th) {
    return 4.0 * kprof * (1.0 + cos(th));
  };
  const auto b11sq_of = [=](const Jet2& th, const Jet2& thp) {
    return ((m2 - m3) * cos(th) - 2.0 * m4 * sin(th) + m2 + m3) / (4.0 * thp);
  };

  // Belt and braces: the squared scale must stay positive wherever the
  // angle rate is meaningfully nonzero.
  for (int i = 0; i < 64; ++i) {
    const double th = 2.0 * M_PI * i / 64.0;
    const double thp = std::cbrt(cubic(Jet2(th)).v);
    if (std::abs(thp) < 1e-9) continue;
    const double b2 = b11sq_of(Jet2(th), Jet2(thp)).v;
    if (!(b2 > 0.0))
      fail("constants.c12",
           "inadmissible: squared scale is not positive over the angle range");
  }
  if (std::abs(std::cbrt(cubic(Jet2(theta0)).v)) < 1e-9)
    fail("initial.theta", "angle rate vanishes at theta0");

  const JetRhs<2> rhs = [=](double,
                            const std::array<Jet2, 2>& y) -> std::array<Jet2, 2> {
    const Jet2 thp = cbrt(cubic(y[0]));
    const Jet2 angp = -(gamma / (2.0 * b11sq_of(y[0], thp)));
    return {thp, angp};
  };
  check_theta_prime_sign(cfg, std::cbrt(cubic(Jet2(theta0)).v));

  OdeOptions opt;
  opt.guards.push_back(
      {"axis-collapse", [](double, const std::vector<double>& y) {
         return 1.0 + std::cos(y[0]) - 1e-2;
       }});
  const OdeSolution sol =
      integrate_ode(value_rhs<2>(rhs), {theta0, 0.0}, cfg.t0, cfg.t1, opt);

  TimeComponent tc;
  set_horizon(tc, cfg);
  tc.m = 6;
  adopt_truncation(tc, sol);
  tc.columns = [=](double t) {
    const std::array<Jet2, 2> y = state_jets<2>(sol, t, rhs);
    const Jet2 th = y[0], ang = y[1];
    const Jet2 u = 2.0 * (1.0 + cos(th));
    const Jet2 thp = cbrt(cubic(th));
    const Jet2 b11 = sqrt(b11sq_of(th, thp));
    const Jet2 b12 =
        ((m2 - m3) * sin(th) + 2.0 * m4 * cos(th)) / (4.0 * b11 * thp);
    const Jet2 b22 = gamma / (b11 * thp);
    const Jet2 half = tan(0.5 * th);
    const Jet2 b15 = (c36 - c46 * half) * b22 / (2.0 * gamma);
    const Jet2 b25 = (m0 + m1 * half) * b22 / gamma2;
    const Jet2 b35 = -(thp / (gamma * u));
    const Jet2 l1 = 1.0 + cos(th), l2 = sin(th);
    const Vec3J B1{b11, Jet2(0.0), Jet2(0.0)};
    const Vec3J B2{b12, b22, Jet2(0.0)};
    const Vec3J C{b15, b25, b35};
    const Mat33T<Jet2> R = rot_z_jets(ang);
    Mat3J A;
    A.cols = 6;
    A[0] = apply_rot(R, B1);
    A[1] = apply_rot(R, B2);
    A[2] = apply_rot(R, l1 * B1 + l2 * B2);
    A[3] = apply_rot(R, l1 * B2 + (-l2) * B1);
    A[4] = apply_rot(R, l1 * C);
    A[5] = apply_rot(R, (-l2) * C);
    return A;
  };
  tc.declared_pairs = {qf("q12", 1, 2, c12),
                       qf("q13", 1, 3, c13),
                       qf("q14", 1, 4, c14),
                       qf("q23", 2, 3, c14 - 2.0 * c12),
                       qf("q24", 2, 4, -c13),
                       qf("q36", 3, 6, c36),
                       qf("q46", 4, 6, c46),
                       qf("q56", 5, 6, c56)};
  declare_pair_measured(tc, "q35", {{3, 5, 1.0}});
  declare_pair_measured(tc, "q45", {{4, 5, 1.0}});
  declare_pair_measured(tc, "q15-q26", {{1, 5, 1.0}, {2, 6, -1.0}});
  declare_pair_measured(tc, "q16+q25", {{1, 6, 1.0}, {2, 5, 1.0}});
  declare_elliptic6_triples(tc);

  FlowMap fm;
  fm.family = cfg.family;
  fm.m = 6;
  fm.v = spatial_elliptic6(fexpr(cfg, "f1"), elliptic6_pair(cfg));
  const double q23v = declared_value(tc, "q23");
  const double q24v = declared_value(tc, "q24");
  const double q35v = declared_value(tc, "q35");
  const double q45v = declared_value(tc, "q45");
  const double d1526 = declared_value(tc, "q15-q26");
  const double d1625 = declared_value(tc, "q16+q25");
  fm.tc = std::move(tc);
  fm.has_closed_invariant = true;
  fm.closed_invariant = [=](const SpatialSample& s) {
    const double F = s.dv[3][2], a = s.dv[4][0], b = s.dv[4][1];
    return Vec3{q23v + q24v * F - q35v * b + c36 * a - q45v * F * b +
                    c46 * F * a,
                -c13 - c14 * F + (q35v + q45v * F) * a + (c36 + c46 * F) * b,
                c12 + d1526 * b - d1625 * a - c56 * (a * a + b * b)};
  };
  return finish(std::move(fm), cfg);
}

// ---------------------------------------------------------------------------
// m = 6 elliptic extension: counter-rotating pairs, closed form
// ---------------------------------------------------------------------------

FlowMap build_m6_elliptic_ext(const FamilyConfig& cfg) {
  const double th0 = cval(cfg, "th0");
  if (std::abs(th0) < 1e-9) fail("constants.th0", "must be nonzero");

  TimeComponent tc;
  set_horizon(tc, cfg);
  tc.m = 6;
  tc.columns = [th0](double t) {
    const Jet2 T = th0 * Jet2::variable(t);
    const Jet2 c = cos(T), s = sin(T);
    const Jet2 c2 = cos(2.0 * T), s2 = sin(2.0 * T);
    Mat3J A;
    A.cols = 6;
    A[0] = {c, s, Jet2(0.0)};
    A[1] = {-s, c, Jet2(0.0)};
    A[2] = {c, -s, Jet2(0.0)};
    A[3] = {s, c, Jet2(0.0)};
    A[4] = {Jet2(0.0), Jet2(0.0), c2};
    A[5] = {Jet2(0.0), Jet2(0.0), s2};
    return A;
  };
  tc.declared_pairs = {qf("q12", 1, 2, 2.0 * th0), qf("q34", 3, 4, -2.0 * th0),
                       qf("q56", 5, 6, -2.0 * th0)};
  add_zero_pairs(tc, {{1, 3}, {1, 4}, {1, 5}, {1, 6}, {2, 3}, {2, 4},
                      {2, 5}, {2, 6}, {3, 5}, {3, 6}, {4, 5}, {4, 6}});
  add_zero_triples(tc, {{1, 2, 3}, {1, 2, 4}, {1, 3, 4}, {2, 3, 4},
                        {1, 5, 6}, {2, 5, 6}, {3, 5, 6}, {4, 5, 6}});
  {
    TripleFunctional f;
    f.name = "e145-e235-e136-e246";
    f.terms = {{1, 4, 5, 1.0}, {2, 3, 5, -1.0}, {1, 3, 6, -1.0},
               {2, 4, 6, -1.0}};
    f.value = 2.0;
    tc.declared_triples.push_back(std::move(f));
  }

  FlowMap fm;
  fm.family = cfg.family;
  fm.m = 6;
  fm.v = spatial_elliptic6_trig(fexpr(cfg, "f1"), elliptic6_pair(cfg));
  fm.tc = std::move(tc);
  fm.has_closed_invariant = true;
  fm.closed_invariant = [th0](const SpatialSample& s) {
    const double a = s.dv[4][0], b = s.dv[4][1];
    return Vec3{0.0, 0.0, 2.0 * th0 * (1.0 + a * a + b * b)};
  };
  return finish(std::move(fm), cfg);
}

// ---------------------------------------------------------------------------
// m = 6 parabolic, main branch: ladder driven by cube-root dynamics
// ---------------------------------------------------------------------------

FlowMap build_m6_parabolic_main(const FamilyConfig& cfg) {
  const double k0 = cval(cfg, "k0"), k1 = cval(cfg, "k1");
  const double k2 = cval(cfg, "k2"), k3 = cval(cfg, "k3");
  const double k4 = cval(cfg, "k4");
  const double c12 = cval(cfg, "c12"), c45 = cval(cfg, "c45");
  for (const auto& [name, value] :
       std::initializer_list<std::pair<const char*, double>>{
           {"k0", k0}, {"k2", k2}, {"k3", k3}, {"c12", c12}, {"c45", c45}}) {
    if (std::abs(value) < 1e-9)
      fail(std::string("constants.") + name, "must be nonzero");
  }
  const double l20 = ival_or(cfg, "ell2", 1.0);
  if (std::abs(l20) < 1e-6) fail("initial.ell2", "must be nonzero");
  const double disc0 = k0 - k2 * l20 * l20;
  if (std::abs(disc0) < 1e-6)
    fail("initial.ell2", "k0 - k2*ell2^2 must be nonzero");
  if (c45 * k3 * disc0 <= 0.0)
    fail("constants.c45",
         "must match the sign of the initial scale rate (k3*(k0 - k2*ell2^2))");
  if (c12 * (-disc0) / c45 <= 0.0)
    fail("constants.c12",
         "c12*(k2*ell2^2 - k0)/c45 must be positive");

  const JetRhs<1> rhs = [=](double,
                            const std::array<Jet2, 1>& y) -> std::array<Jet2, 1> {
    const Jet2 l2 = y[0];
    return {cbrt(k3 * l2 * l2 * l2 * l2 / (k0 - k2 * l2 * l2))};
  };

  OdeOptions opt;
  const double s2 = l20 >= 0.0 ? 1.0 : -1.0;
  const double sd = disc0 >= 0.0 ? 1.0 : -1.0;
  opt.guards.push_back({"ell2", [s2](double, const std::vector<double>& y) {
                          return s2 * y[0] - 1e-6;
                        }});
  opt.guards.push_back(
      {"k0-k2*ell2^2", [=](double, const std::vector<double>& y) {
         return sd * (k0 - k2 * y[0] * y[0]) - 1e-6;
       }});
  const OdeSolution sol =
      integrate_ode(value_rhs<1>(rhs), {l20}, cfg.t0, cfg.t1, opt);

  TimeComponent tc;
  set_horizon(tc, cfg);
  tc.m = 6;
  adopt_truncation(tc, sol);
  tc.columns = [=](double t) {
    const std::array<Jet2, 1> y = state_jets<1>(sol, t, rhs);
    const Jet2 l2 = y[0];
    const Jet2 l2p = cbrt(k3 * l2 * l2 * l2 * l2 / (k0 - k2 * l2 * l2));
    const Jet2 b25 = sqrt(c45 / l2p);
    const Jet2 b12 =
        sqrt(c12 * l2 * l2 / (c45 * (k2 * l2 * l2 - k0))) * b25;
    const Jet2 b23 = (k4 * l2 - k0) * b25;
    const Jet2 l1 = k2 * l2 + k1 + k0 / l2;
    return parabolic_columns(l1, l2, b12, Jet2(0.0), Jet2(0.0), b23, b25);
  };
  tc.declared_pairs = {qf("q12", 1, 2, c12), qf("q45", 4, 5, c45),
                       qf("q35", 3, 5, k4 * c45), qf("q56", 5, 6, -k2 * c45)};
  add_zero_pairs(tc, {{1, 3}, {1, 4}, {2, 3}, {2, 4}, {2, 5}});
  {
    PairFunctional f;
    f.name = "q15-q26";
    f.terms = {{1, 5, 1.0}, {2, 6, -1.0}};
    f.value = 0.0;
    tc.declared_pairs.push_back(std::move(f));
  }
  declare_pair_measured(tc, "q36", {{3, 6, 1.0}});
  declare_pair_measured(tc, "q46", {{4, 6, 1.0}});
  tc.declared_triples = {ef("e235", 2, 3, 5, 1.0)};
  add_zero_triples(tc, {{1, 2, 3}, {1, 2, 4}, {1, 2, 5}, {1, 2, 6},
                        {2, 4, 5}, {3, 4, 5}, {3, 4, 6}, {3, 5, 6},
                        {4, 5, 6}});
  {
    TripleFunctional f;
    f.name = "e145-e246";
    f.terms = {{1, 4, 5, 1.0}, {2, 4, 6, -1.0}};
    f.value = 1.0;
    tc.declared_triples.push_back(std::move(f));
    TripleFunctional g;
    g.name = "e135-e236";
    g.terms = {{1, 3, 5, 1.0}, {2, 3, 6, -1.0}};
    g.value = 0.0;
    tc.declared_triples.push_back(std::move(g));
  }

  FlowMap fm;
  fm.family = cfg.family;
  fm.m = 6;
  fm.v = spatial_parabolic6(fexpr(cfg, "f1"), fexpr(cfg, "f2"),
                            fexpr(cfg, "f3"));
  const double q36v = declared_value(tc, "q36");
  const double q46v = declared_value(tc, "q46");
  const double q35v = k4 * c45, q56v = -k2 * c45;
  fm.tc = std::move(tc);
  fm.has_closed_invariant = true;
  fm.closed_invariant = [=](const SpatialSample& s) {
    const double F = s.dv[3][2];
    const double V = s.dv[4][0], W = s.dv[5][0];
    return Vec3{-q35v * W - c45 * F * W,
                (q35v + c45 * F) * V + (q36v + q46v * F) * W,
                c12 - q56v * W * W};
  };
  return finish(std::move(fm), cfg);
}

// ---------------------------------------------------------------------------
// m = 6 parabolic, power-law branches (closed form on t > 0)
// ---------------------------------------------------------------------------

void declare_parabolic_measured(TimeComponent& tc) {
  for (const auto& p : std::initializer_list<std::pair<int, int>>{
           {1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {2, 5}, {3, 5},
           {3, 6}, {4, 5}, {4, 6}, {5, 6}}) {
    declare_pair_measured(tc, "q" + std::to_string(p.first) +
                                  std::to_string(p.second),
                          {{p.first, p.second, 1.0}});
  }
  declare_pair_measured(tc, "q15-q26", {{1, 5, 1.0}, {2, 6, -1.0}});
  declare_triple_measured(tc, "e235", {{2, 3, 5, 1.0}});
  declare_triple_measured(tc, "e145-e246", {{1, 4, 5, 1.0}, {2, 4, 6, -1.0}});
  add_zero_triples(tc, {{1, 2, 3}, {1, 2, 4}, {1, 2, 5}, {1, 2, 6},
                        {2, 4, 5}, {3, 4, 5}, {3, 4, 6}, {3, 5, 6},
                        {4, 5, 6}});
  TripleFunctional g;
  g.name = "e135-e236";
  g.terms = {{1, 3, 5, 1.0}, {2, 3, 6, -1.0}};
  g.value = 0.0;
  tc.declared_triples.push_back(std::move(g));
}

FlowMap finish_parabolic_closed(TimeComponent tc, const FamilyConfig& cfg) {
  declare_parabolic_measured(tc);
  FlowMap fm;
  fm.family = cfg.family;
  fm.m = 6;
  fm.v = spatial_parabolic6(fexpr(cfg, "f1"), fexpr(cfg, "f2"),
                            fexpr(cfg, "f3"));
  const double q13v = declared_value(tc, "q13");
  const double q14v = declared_value(tc, "q14");
  const double q23v = declared_value(tc, "q23");
  const double q24v = declared_value(tc, "q24");
  const double q25v = declared_value(tc, "q25");
  const double q35v = declared_value(tc, "q35");
  const double q36v = declared_value(tc, "q36");
  const double q45v = declared_value(tc, "q45");
  const double q46v = declared_value(tc, "q46");
  const double q56v = declared_value(tc, "q56");
  const double q12v = declared_value(tc, "q12");
  const double d1526 = declared_value(tc, "q15-q26");
  fm.tc = std::move(tc);
  fm.has_closed_invariant = true;
  fm.closed_invariant = [=](const SpatialSample& s) {
    const double F = s.dv[3][2];
    const double V = s.dv[4][0], W = s.dv[5][0];
    return Vec3{q23v + q24v * F - q35v * W - q45v * F * W,
                -q13v - q14v * F + (q35v + q45v * F) * V +
                    (q36v + q46v * F) * W,
                q12v + d1526 * W - q25v * V - q56v * W * W};
  };
  return finish(std::move(fm), cfg);
}

FlowMap build_m6_parabolic_growth(const FamilyConfig& cfg) {
  const double k1 = cval(cfg, "k1"), k2 = cval(cfg, "k2");
  const double k3 = cval(cfg, "k3"), k4 = cval(cfg, "k4");
  const double k5 = cval(cfg, "k5"), k6 = cval(cfg, "k6");
  const double k7 = cval(cfg, "k7");
  for (const auto& [name, value] :
       std::initializer_list<std::pair<const char*, double>>{
           {"k3", k3}, {"k4", k4}, {"k5", k5}}) {
    if (std::abs(value) < 1e-9)
      fail(std::string("constants.") + name, "must be nonzero");
  }
  if (!(cfg.t0 > 1e-6)) fail("t0", "must be positive for this family");

  TimeComponent tc;
  set_horizon(tc, cfg);
  tc.m = 6;
  tc.columns = [=](double t) {
    const Jet2 T = Jet2::variable(t);
    const Jet2 t2 = T * T, t3 = T * T * T, tinv = 1.0 / T;
    const Jet2 l2 = k4 * t3;
    const Jet2 l1 = k2 * k4 * t3 + k1;
    return parabolic_columns(l1, l2, k5 * tinv, k6 * t2, Jet2(0.0), k7 * t2,
                             k3 * tinv);
  };
  return finish_parabolic_closed(std::move(tc), cfg);
}

FlowMap build_m6_parabolic_decay(const FamilyConfig& cfg) {
  const double k0 = cval(cfg, "k0"), k1 = cval(cfg, "k1");
  const double k3 = cval(cfg, "k3"), k4 = cval(cfg, "k4");
  const double k5 = cval(cfg, "k5"), k6 = cval(cfg, "k6");
  const double k7 = cval(cfg, "k7"), k8 = cval(cfg, "k8");
  for (const auto& [name, value] :
       std::initializer_list<std::pair<const char*, double>>{
           {"k3", k3}, {"k4", k4}, {"k5", k5}}) {
    if (std::abs(value) < 1e-9)
      fail(std::string("constants.") + name, "must be nonzero");
  }
  if (!(cfg.t0 > 1e-6)) fail("t0", "must be positive for this family");

  TimeComponent tc;
  set_horizon(tc, cfg);
  tc.m = 6;
  tc.columns = [=](double t) {
    const Jet2 T = Jet2::variable(t);
    const Jet2 t2 = T * T, t3 = T * T * T, tinv = 1.0 / T;
    const Jet2 l2 = k4 / t3;
    const Jet2 l1 = k1 + k0 * t3 / k4;
    const Jet2 b13 = -(k0 * k6) * t2 + k7 * tinv;
    const Jet2 b23 = -(k0 * k5) * t2 + k8 * tinv;
    return parabolic_columns(l1, l2, k3 * tinv, b13, k6 * t2, b23, k5 * t2);
  };
  return finish_parabolic_closed(std::move(tc), cfg);
}

// ---------------------------------------------------------------------------
// m = 6 parabolic extension: power-law axis pairs, closed form
// ---------------------------------------------------------------------------

FlowMap build_m6_parabolic_ext(const FamilyConfig& cfg) {
  if (!(cfg.t0 > 1e-6)) fail("t0", "must be positive for this family");

  ParabolicExtension ext;
  try {
    ext = parabolic_extension_build(fexpr(cfg, "F"), fexpr(cfg, "f2"),
                                    fexpr(cfg, "g"));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("functions.") + e.what());
  }
  for (double r : ext.residuals) {
    if (!(r <= 1e-8)) {
      std::ostringstream os;
      os << "functions.F: extension constraints are violated (residual " << r
         << ")";
      throw ConfigError(os.str());
    }
  }

  TimeComponent tc;
  set_horizon(tc, cfg);
  tc.m = 6;
  tc.columns = [](double t) {
    const Jet2 T = Jet2::variable(t);
    const Jet2 t2 = T * T, tinv = 1.0 / T;
    Mat3J A;
    A.cols = 6;
    A[0] = {t2, Jet2(0.0), Jet2(0.0)};
    A[1] = {tinv, Jet2(0.0), Jet2(0.0)};
    A[2] = {Jet2(0.0), t2, Jet2(0.0)};
    A[3] = {Jet2(0.0), tinv, Jet2(0.0)};
    A[4] = {Jet2(0.0), Jet2(0.0), t2};
    A[5] = {Jet2(0.0), Jet2(0.0), tinv};
    return A;
  };
  tc.declared_pairs = {qf("q12", 1, 2, 3.0), qf("q34", 3, 4, 3.0),
                       qf("q56", 5, 6, 3.0)};
  add_zero_pairs(tc, {{1, 3}, {1, 4}, {1, 5}, {1, 6}, {2, 3}, {2, 4},
                      {2, 5}, {2, 6}, {3, 5}, {3, 6}, {4, 5}, {4, 6}});
  tc.declared_triples = {ef("e146", 1, 4, 6, 1.0), ef("e236", 2, 3, 6, 1.0),
                         ef("e245", 2, 4, 5, 1.0)};
  add_zero_triples(tc, {{1, 2, 3}, {1, 2, 4}, {1, 2, 5}, {1, 2, 6},
                        {1, 3, 4}, {2, 3, 4}, {3, 4, 5}, {3, 4, 6},
                        {1, 5, 6}, {2, 5, 6}, {3, 5, 6}, {4, 5, 6}});

  FlowMap fm;
  fm.family = cfg.family;
  fm.m = 6;
  fm.v = std::move(ext.sc);
  fm.tc = std::move(tc);
  fm.has_closed_invariant = true;
  fm.closed_invariant = [](const SpatialSample& s) {
    const Vec3 g34 = cross(s.dv[2], s.dv[3]);
    const Vec3 g56 = cross(s.dv[4], s.dv[5]);
    return Vec3{3.0 * (g34[0] + g56[0]), 3.0 * (g34[1] + g56[1]),
                3.0 * (1.0 + g34[2] + g56[2])};
  };
  return finish(std::move(fm), cfg);
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

const std::vector<FamilyInfo>& registry() {
  static const std::vector<FamilyInfo> infos = {
      {"m3-kirchhoff", 3, "ode",
       "rigid rotation times a volume-preserving triangular profile over the "
       "identity components",
       "constants: c12 c13 c23; functions: b11 b22 w1 w2 w3 (t only); "
       "initial: b12 b13 b23"},
      {"m4", 4, "ode",
       "rotating triangular profile with one graph component f(z2, z3)",
       "constants: c12 c13 c14 c23 c24 c34; functions: theta b11 b22 (t "
       "only), f(z2, z3); initial: b14 b23"},
      {"m5-elliptic", 5, "ode",
       "rotating planar pair built on an anti-CR descriptor",
       "constants: c12; functions: w (zeta), extra1 extra2 (z3), b11 (t "
       "only); initial: theta"},
      {"m5-hyperbolic", 5, "ode",
       "axis-aligned stretching with two transported graph components",
       "constants: c15; functions: f1(z1, z3) f2(z2, z3), b11 (t only); "
       "initial: ell"},
      {"m5-parabolic", 5, "ode",
       "shear pair sharing an axis, driven by one scale function",
       "constants: c12; functions: f1 f2 (z1, z3), b12 (t only); initial: "
       "ell"},
      {"m6-hyperbolic-i", 6, "ode",
       "three axis pairs with coupled scale factors locked by a quadratic",
       "constants: c16 c24 c35; functions: f1(z1) f2(z2) f3(z3), b11 (t "
       "only); initial: ell1 ell2"},
      {"m6-hyperbolic-ii", 6, "ode",
       "three axis pairs locked to one scale factor by cube-root dynamics",
       "constants: k0 k1 k2 k3 k4 k5 m0 m1; functions: f1(z1) f2(z2) f3(z3); "
       "initial: ell1"},
      {"m6-hyperbolic-ext", 6, "closed-form",
       "exponential axis pairs over a transported-profile spatial shape",
       "constants: c; functions: g q1 q"},
      {"m6-elliptic-kne1", 6, "ode",
       "rotating circular pair with an axis column, k < 1",
       "constants: c12 c13 c14 k c56 gamma_sign [theta_prime_sign]; "
       "functions: w (zeta), f1(z3); initial: theta"},
      {"m6-elliptic-keq1", 6, "ode",
       "rotating circular pair with a tilted axis column, k = 1 "
       "(finite-time axis collapse)",
       "constants: c12 c13 c14 c36 c46 c56 gamma_sign "
       "[theta_prime_sign]; functions: w (zeta), f1(z3); initial: theta"},
      {"m6-elliptic-ext", 6, "closed-form",
       "counter-rotating planar pairs with a doubled-rate axis pair",
       "constants: th0; functions: w (zeta), f1(z3)"},
      {"m6-parabolic-main", 6, "ode",
       "parallel-column ladder driven by cube-root dynamics",
       "constants: k0 k1 k2 k3 k4 c12 c45; functions: f1(z3) f2(z1) f3(z1); "
       "initial: ell2"},
      {"m6-parabolic-growth", 6, "closed-form",
       "power-law parallel-column ladder, cubic-growth branch",
       "constants: k1 k2 k3 k4 k5 k6 k7; functions: f1(z3) f2(z1) f3(z1)"},
      {"m6-parabolic-decay", 6, "closed-form",
       "power-law parallel-column ladder, cubic-decay branch",
       "constants: k0 k1 k3 k4 k5 k6 k7 k8; functions: f1(z3) f2(z1) f3(z1)"},
      {"m6-parabolic-ext", 6, "closed-form",
       "three power-law axis pairs over an extension spatial shape",
       "functions: F (s, z), f2, g"},
  };
  return infos;
}

// ---------------------------------------------------------------------------
// Randomized admissible constants
// ---------------------------------------------------------------------------

double unit_draw(std::mt19937_64& g) {
  return double(g() >> 11) * (1.0 / 9007199254740992.0);
}

double mag(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * unit_draw(g);
}

double smag(std::mt19937_64& g, double lo, double hi) {
  const double m = mag(g, lo, hi);
  return (g() & 1u) ? m : -m;
}

std::string coeff_term(double coeff, const std::string& var) {
  std::ostringstream os;
  os.precision(17);
  os << (coeff < 0.0 ? " - " : " + ") << std::abs(coeff) << "*" << var;
  return os.str();
}

void draw_constants(FamilyConfig& cfg, const std::string& id,
                    std::mt19937_64& g) {
  auto& c = cfg.constants;
  if (id == "m3-kirchhoff") {
    c["c12"] = smag(g, 0.3, 2.5);
    c["c13"] = smag(g, 0.3, 2.5);
    c["c23"] = smag(g, 0.3, 2.5);
  } else if (id == "m4") {
    for (const char* n : {"c12", "c13", "c14", "c23", "c24", "c34"})
      c[n] = smag(g, 0.3, 2.5);
  } else if (id == "m5-elliptic" || id == "m5-parabolic") {
    c["c12"] = smag(g, 0.3, 2.5);
  } else if (id == "m5-hyperbolic") {
    c["c15"] = smag(g, 0.3, 2.5);
  } else if (id == "m6-hyperbolic-i") {
    c["c16"] = mag(g, 0.3, 2.0);
    c["c24"] = mag(g, 0.3, 2.0);
    c["c35"] = -mag(g, 0.3, 2.5);
    cfg.initial["ell1"] = mag(g, 2.2, 3.0);
    cfg.initial["ell2"] = mag(g, 2.2, 3.0);
  } else if (id == "m6-hyperbolic-ii") {
    c["k0"] = mag(g, 0.3, 1.0);
    c["k1"] = mag(g, 0.3, 2.5);
    c["k2"] = smag(g, 0.3, 2.5);
    c["k3"] = smag(g, 0.3, 1.0);
    c["k4"] = smag(g, 0.3, 1.0);
    c["k5"] = smag(g, 0.3, 1.0);
    c["m0"] = mag(g, 1.5, 2.5);
    c["m1"] = mag(g, 0.3, 0.8);
    cfg.initial["ell1"] = mag(g, 0.5, 1.5);
  } else if (id == "m6-hyperbolic-ext") {
    c["c"] = smag(g, 0.3, 1.2);
  } else if (id == "m6-elliptic-kne1") {
    const double c12 = smag(g, 1.5, 2.5);
    const double k = mag(g, 0.2, 0.7);
    c["c12"] = c12;
    c["k"] = k;
    c["c14"] = c12 * k + smag(g, 0.1, 0.4);
    c["c13"] = smag(g, 0.3, 0.6);
    c["c56"] = (c12 > 0.0 ? -1.0 : 1.0) * mag(g, 0.3, 2.5);
    c["gamma_sign"] = (g() & 1u) ? 1.0 : -1.0;
  } else if (id == "m6-elliptic-keq1") {
    const double c12 = smag(g, 1.5, 2.5);
    c["c12"] = c12;
    c["c14"] = c12 + smag(g, 0.1, 0.4);
    c["c13"] = smag(g, 0.3, 0.6);
    c["c36"] = smag(g, 0.3, 0.8);
    c["c46"] = smag(g, 0.3, 0.8);
    c["c56"] = (c12 > 0.0 ? -1.0 : 1.0) * mag(g, 0.3, 2.5);
  } else if (id == "m6-elliptic-ext") {
    c["th0"] = smag(g, 0.3, 2.5);
  } else if (id == "m6-parabolic-main") {
    const double k2 = mag(g, 0.3, 1.0);
    const double k0 = -mag(g, 0.3, 1.0);
    const double k3 = smag(g, 0.3, 1.0);
    const double l20 = mag(g, 0.8, 1.5);
    const double disc0 = k0 - k2 * l20 * l20;
    c["k0"] = k0;
    c["k1"] = smag(g, 0.3, 1.0);
    c["k2"] = k2;
    c["k3"] = k3;
    c["k4"] = smag(g, 0.3, 1.0);
    c["c45"] = (k3 * disc0 > 0.0 ? 1.0 : -1.0) * mag(g, 0.3, 1.5);
    c["c12"] = (c["c45"] * (-disc0) > 0.0 ? 1.0 : -1.0) * mag(g, 0.3, 2.5);
    cfg.initial["ell2"] = l20;
  } else if (id == "m6-parabolic-growth") {
    c["k3"] = smag(g, 0.3, 1.5);
    c["k4"] = smag(g, 0.3, 1.5);
    c["k5"] = smag(g, 0.3, 1.5);
    c["k1"] = smag(g, 0.3, 1.0);
    c["k2"] = smag(g, 0.3, 1.0);
    c["k6"] = smag(g, 0.3, 1.0);
    c["k7"] = smag(g, 0.3, 1.0);
  } else if (id == "m6-parabolic-decay") {
    c["k4"] = smag(g, 0.5, 1.5);
    c["k3"] = smag(g, 0.3, 1.5);
    c["k5"] = smag(g, 0.3, 1.5);
    c["k0"] = smag(g, 0.3, 0.8);
    c["k1"] = smag(g, 0.3, 1.0);
    c["k6"] = smag(g, 0.3, 1.0);
    c["k7"] = smag(g, 0.3, 1.0);
    c["k8"] = smag(g, 0.3, 1.0);
  } else if (id == "m6-parabolic-ext") {
    cfg.functions["F"] = "s" + coeff_term(smag(g, 0.3, 0.8), "z2");
    cfg.functions["g"] = "z1" + coeff_term(smag(g, 0.3, 0.8), "z3");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Public interface
// ---------------------------------------------------------------------------

const std::vector<FamilyInfo>& family_registry() { return registry(); }

const FamilyInfo& family_info(const std::string& id) {
  for (const FamilyInfo& info : registry())
    if (info.id == id) return info;
  throw ConfigError("family: unknown id '" + id + "'");
}

FamilyConfig catalog_config(const std::string& id) {
  family_info(id);
  FamilyConfig cfg;
  cfg.family = id;
  if (id == "m3-kirchhoff") {
    cfg.constants = {{"c12", 0.5}, {"c13", -0.2}, {"c23", 0.8}};
    cfg.functions = {{"b11", "1 + 0.25*t"},
                     {"b22", "1 - 0.1*t"},
                     {"w1", "0.4"},
                     {"w2", "-0.3"},
                     {"w3", "0.6"}};
    cfg.initial = {{"b12", 0.0}, {"b13", 0.0}, {"b23", 0.0}};
  } else if (id == "m4") {
    cfg.constants = {{"c12", 0.4}, {"c13", -0.3}, {"c14", 1.2},
                     {"c23", 0.6}, {"c24", 0.7},  {"c34", -0.5}};
    cfg.functions = {{"theta", "0.5*t"},
                     {"b11", "1 + 0.2*t"},
                     {"b22", "exp(-0.15*t)"},
                     {"f", "z2*z3 + 0.3*z2^2"}};
    cfg.initial = {{"b14", 0.8}, {"b23", 0.0}};
  } else if (id == "m5-elliptic") {
    cfg.constants = {{"c12", 2.0}};
    cfg.functions = {{"w", "0.25*zeta^2"},
                     {"extra1", "0.5*z3"},
                     {"extra2", "-0.25*z3^2"},
                     {"b11", "1"}};
    cfg.initial = {{"theta", 0.0}};
  } else if (id == "m5-hyperbolic") {
    cfg.constants = {{"c15", 1.0}};
    cfg.functions = {{"f1", "0.5*z1*z3"}, {"f2", "sin(z2) + z3"},
                     {"b11", "1"}};
    cfg.initial = {{"ell", 3.0}};
  } else if (id == "m5-parabolic") {
    cfg.constants = {{"c12", 1.5}};
    cfg.functions = {{"f1", "0.25*z1^2 + z1"}, {"f2", "0.2*z1^2*z3"},
                     {"b12", "1"}};
    cfg.initial = {{"ell", 1.0}};
  } else if (id == "m6-hyperbolic-i") {
    cfg.constants = {{"c16", 1.0}, {"c24", 0.8}, {"c35", -0.9}};
    cfg.functions = {{"f1", "0.25*z1^2"},
                     {"f2", "0.25*z2^2"},
                     {"f3", "0.25*z3^2"},
                     {"b11", "1 + t/8"}};
    cfg.initial = {{"ell1", 2.0}, {"ell2", 2.0}};
  } else if (id == "m6-hyperbolic-ii") {
    cfg.constants = {{"k0", 0.2}, {"k1", 1.0}, {"k2", 1.0}, {"k3", 0.5},
                     {"k4", 0.3}, {"k5", -0.4}, {"m0", 2.0}, {"m1", 0.5}};
    cfg.functions = {{"f1", "0.25*z1^2"},
                     {"f2", "0.25*z2^2"},
                     {"f3", "0.25*z3^2"}};
    cfg.initial = {{"ell1", 1.0}};
  } else if (id == "m6-hyperbolic-ext") {
    cfg.constants = {{"c", 0.75}};
    cfg.functions = {{"g", "0.7"}, {"q1", "s^2"}, {"q", "1 + 0.25*z3^2"}};
  } else if (id == "m6-elliptic-kne1") {
    cfg.constants = {{"c12", 2.0},  {"c13", 0.3}, {"c14", 0.4},
                     {"k", 0.5},    {"c56", -1.0}, {"gamma_sign", 1.0}};
    cfg.functions = {{"w", "0.5*zeta^2 + 2*zeta"}, {"f1", "0.5*z3"}};
    cfg.initial = {{"theta", 0.0}};
  } else if (id == "m6-elliptic-keq1") {
    cfg.constants = {{"c12", 2.0}, {"c13", 0.3},  {"c14", 0.4},
                     {"c36", 0.5}, {"c46", -0.4}, {"c56", -1.0},
                     {"gamma_sign", 1.0}};
    cfg.functions = {{"w", "0.5*zeta^2 + 2*zeta"}, {"f1", "0.5*z3"}};
    cfg.initial = {{"theta", 1.0}};
    cfg.t1 = 5.0;
  } else if (id == "m6-elliptic-ext") {
    cfg.constants = {{"th0", 0.75}};
    cfg.functions = {{"w", "-zeta - 0.2*zeta^2"}, {"f1", "0.4*z3^2"}};
  } else if (id == "m6-parabolic-main") {
    cfg.constants = {{"k0", -0.6}, {"k1", 0.3}, {"k2", 0.8}, {"k3", -0.7},
                     {"k4", -0.5}, {"c12", 0.8}, {"c45", 0.9}};
    cfg.functions = {{"f1", "0.4*z3^2"}, {"f2", "z1"}, {"f3", "0.2*z1^2"}};
    cfg.initial = {{"ell2", 1.2}};
  } else if (id == "m6-parabolic-growth") {
    cfg.constants = {{"k1", 0.0}, {"k2", 1.0}, {"k3", 1.0}, {"k4", 1.0},
                     {"k5", 1.0}, {"k6", 0.0}, {"k7", 0.0}};
    cfg.functions = {{"f1", "0.4*z3^2"}, {"f2", "z1"}, {"f3", "0.2*z1^2"}};
    cfg.t0 = 0.5;
    cfg.t1 = 2.0;
  } else if (id == "m6-parabolic-decay") {
    cfg.constants = {{"k0", 0.5}, {"k1", 0.2}, {"k3", 1.0}, {"k4", 1.0},
                     {"k5", 0.8}, {"k6", 0.3}, {"k7", -0.4}, {"k8", 0.25}};
    cfg.functions = {{"f1", "0.4*z3^2"}, {"f2", "z1"}, {"f3", "0.2*z1^2"}};
    cfg.t0 = 0.5;
    cfg.t1 = 2.0;
  } else if (id == "m6-parabolic-ext") {
    cfg.functions = {{"F", "s + 0.5*z2"}, {"g", "z1 + 0.5*z3"},
                     {"f2", "z1"}};
    cfg.t0 = 0.5;
    cfg.t1 = 2.0;
  }
  return cfg;
}

FamilyConfig randomized_config(const std::string& id, std::uint64_t seed) {
  family_info(id);
  std::mt19937_64 g(seed ^ 0x9e3779b97f4a7c15ULL);
  for (int attempt = 0; attempt < 64; ++attempt) {
    FamilyConfig cfg = catalog_config(id);
    cfg.seed = seed;
    draw_constants(cfg, id, g);
    try {
      (void)build_solution(cfg);
      return cfg;
    } catch (const ConfigError&) {
      continue;
    } catch (const NumericError&) {
      continue;
    }
  }
  throw ConfigError("randomized: no admissible draw for family '" + id + "'");
}

FlowMap build_solution(const FamilyConfig& cfg) {
  family_info(cfg.family);
  if (!(cfg.t1 > cfg.t0)) fail("t1", "horizon must satisfy t1 > t0");
  for (int a = 0; a < 3; ++a) {
    if (!(cfg.box_hi[a] > cfg.box_lo[a]))
      fail("box_hi", "sample box must have positive extent on every axis");
  }
  if (cfg.grid_n < 2) fail("grid_n", "must be at least 2");
  if (cfg.grid_t < 2) fail("grid_t", "must be at least 2");

  const std::string& id = cfg.family;
  if (id == "m3-kirchhoff") return build_m3(cfg);
  if (id == "m4") return build_m4(cfg);
  if (id == "m5-elliptic") return build_m5_elliptic(cfg);
  if (id == "m5-hyperbolic") return build_m5_hyperbolic(cfg);
  if (id == "m5-parabolic") return build_m5_parabolic(cfg);
  if (id == "m6-hyperbolic-i") return build_m6_hyperbolic_i(cfg);
  if (id == "m6-hyperbolic-ii") return build_m6_hyperbolic_ii(cfg);
  if (id == "m6-hyperbolic-ext") return build_m6_hyperbolic_ext(cfg);
  if (id == "m6-elliptic-kne1") return build_m6_elliptic_kne1(cfg);
  if (id == "m6-elliptic-keq1") return build_m6_elliptic_keq1(cfg);
  if (id == "m6-elliptic-ext") return build_m6_elliptic_ext(cfg);
  if (id == "m6-parabolic-main") return build_m6_parabolic_main(cfg);
  if (id == "m6-parabolic-growth") return build_m6_parabolic_growth(cfg);
  if (id == "m6-parabolic-decay") return build_m6_parabolic_decay(cfg);
  if (id == "m6-parabolic-ext") return build_m6_parabolic_ext(cfg);
  throw ConfigError("family: unknown id '" + id + "'");
}

// ---------------------------------------------------------------------------
// JSON round trip
// ---------------------------------------------------------------------------

std::string FamilyConfig::to_json() const {
  json j;
  j["family"] = family;
  j["constants"] = json::object();
  for (const auto& [k, v] : constants) j["constants"][k] = v;
  j["functions"] = json::object();
  for (const auto& [k, v] : functions) j["functions"][k] = v;
  j["initial"] = json::object();
  for (const auto& [k, v] : initial) j["initial"][k] = v;
  j["t0"] = t0;
  j["t1"] = t1;
  j["box_lo"] = {box_lo[0], box_lo[1], box_lo[2]};
  j["box_hi"] = {box_hi[0], box_hi[1], box_hi[2]};
  j["grid_n"] = grid_n;
  j["grid_t"] = grid_t;
  j["seed"] = seed;
  if (!declare_override.empty()) {
    j["declare_override"] = json::object();
    for (const auto& [k, v] : declare_override) j["declare_override"][k] = v;
  }
  return j.dump(2) + "\n";
}

namespace {

double json_number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "must be a number");
  return j.get<double>();
}

void json_number_map(const json& j, const std::string& field,
                     std::map<std::string, double>& out) {
  if (!j.is_object()) fail(field, "must be an object");
  for (const auto& [k, v] : j.items())
    out[k] = json_number(v, field + "." + k);
}

}  // namespace

FamilyConfig FamilyConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  static const std::vector<std::string> known = {
      "family", "constants", "functions", "initial",
      "t0",     "t1",        "box_lo",    "box_hi",
      "grid_n", "grid_t",    "seed",      "declare_override"};
  for (const auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw ConfigError("config: unknown key '" + k + "'");
  }

  FamilyConfig cfg;
  if (!j.contains("family") || !j["family"].is_string())
    fail("family", "missing or not a string");
  cfg.family = j["family"].get<std::string>();
  if (j.contains("constants"))
    json_number_map(j["constants"], "constants", cfg.constants);
  if (j.contains("functions")) {
    if (!j["functions"].is_object()) fail("functions", "must be an object");
    for (const auto& [k, v] : j["functions"].items()) {
      if (!v.is_string()) fail("functions." + k, "must be a string");
      cfg.functions[k] = v.get<std::string>();
    }
  }
  if (j.contains("initial"))
    json_number_map(j["initial"], "initial", cfg.initial);
  if (j.contains("t0")) cfg.t0 = json_number(j["t0"], "t0");
  if (j.contains("t1")) cfg.t1 = json_number(j["t1"], "t1");
  for (const char* boxkey : {"box_lo", "box_hi"}) {
    if (!j.contains(boxkey)) continue;
    const json& b = j[boxkey];
    if (!b.is_array() || b.size() != 3)
      fail(boxkey, "must be an array of three numbers");
    Vec3& dst = (std::string(boxkey) == "box_lo") ? cfg.box_lo : cfg.box_hi;
    for (int a = 0; a < 3; ++a)
      dst[a] = json_number(b[a], std::string(boxkey) + "[" +
                                     std::to_string(a) + "]");
  }
  if (j.contains("grid_n")) {
    if (!j["grid_n"].is_number_integer()) fail("grid_n", "must be an integer");
    cfg.grid_n = j["grid_n"].get<int>();
  }
  if (j.contains("grid_t")) {
    if (!j["grid_t"].is_number_integer()) fail("grid_t", "must be an integer");
    cfg.grid_t = j["grid_t"].get<int>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() ||
        (j["seed"].is_number_integer() && j["seed"].get<long long>() < 0))
      fail("seed", "must be a non-negative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("declare_override"))
    json_number_map(j["declare_override"], "declare_override",
                    cfg.declare_override);
  return cfg;
}

}  // namespace lagrflow
