// ---------------------------------------------------------------------------
// Spatial component shapes: sampling, constraint residuals, and the builders
// for every supported shape of v(z).
// ---------------------------------------------------------------------------

#include "lagrflow/spatial.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "lagrflow/errors.hpp"

namespace lagrflow {

namespace {

const char* kSpaceVar[3] = {"z1", "z2", "z3"};

ExprPtr z1() { return make_symbol("z1"); }
ExprPtr z2() { return make_symbol("z2"); }
ExprPtr z3() { return make_symbol("z3"); }

/// Reject expressions that use a variable outside `allowed`, naming the
/// configuration field in the error.
void require_alphabet(const ExprPtr& e, const std::string& field,
                      std::initializer_list<const char*> allowed) {
  static const char* kAll[] = {"t", "z1", "z2", "z3", "s"};
  for (const char* var : kAll) {
    bool ok = false;
    for (const char* a : allowed) {
      if (std::string(var) == a) ok = true;
    }
    if (!ok && references(e, var)) {
      throw ConfigError(field + ": must not depend on " + var);
    }
  }
}

/// Fill gradients from the components; everything past m stays null.
SpatialComponent finish(int m, std::array<ExprPtr, 6> comps) {
  SpatialComponent sc;
  sc.m = m;
  sc.component = std::move(comps);
  for (int i = 0; i < m; ++i) {
    for (int a = 0; a < 3; ++a) {
      sc.gradient[i][a] = differentiate(sc.component[i], kSpaceVar[a]);
    }
  }
  return sc;
}

ScalarConstraint scal(std::string name, std::vector<TripleTerm> terms) {
  return ScalarConstraint{std::move(name), std::move(terms)};
}

VectorConstraint vect(std::string name, std::vector<PairTerm> terms) {
  return VectorConstraint{std::move(name), std::move(terms)};
}

void require_anti_cr(const AntiCrPair& pair, const std::string& field) {
  double r = anti_cr_residual(pair);
  if (!(r <= 1e-12)) {
    std::ostringstream os;
    os << field << ": pair violates the divergence/rotation system "
       << "(residual " << r << ")";
    throw ConfigError(os.str());
  }
}

}  // namespace

SpatialSample SpatialComponent::sample(const Vec3& z) const {
  Env<double> env{{"z1", z[0]}, {"z2", z[1]}, {"z3", z[2]}};
  SpatialSample s;
  s.z = z;
  for (int i = 0; i < m; ++i) {
    s.v[i] = eval(component[i], env);
    for (int a = 0; a < 3; ++a) s.dv[i][a] = eval(gradient[i][a], env);
  }
  return s;
}

double SpatialComponent::minor3(const SpatialSample& s, int i, int j,
                                int k) const {
  return det3(s.dv[i - 1], s.dv[j - 1], s.dv[k - 1]);
}

Vec3 SpatialComponent::two_form(const SpatialSample& s, int i, int j) const {
  return cross(s.dv[i - 1], s.dv[j - 1]);
}

double SpatialComponent::scalar_residual(const SpatialSample& s,
                                         const ScalarConstraint& c) const {
  double acc = 0.0;
  for (const TripleTerm& term : c.terms) {
    acc += term.coeff * minor3(s, term.i, term.j, term.k);
  }
  return acc;
}

Vec3 SpatialComponent::vector_residual(const SpatialSample& s,
                                       const VectorConstraint& c) const {
  Vec3 acc{0.0, 0.0, 0.0};
  for (const PairTerm& term : c.terms) {
    Vec3 g = two_form(s, term.i, term.j);
    for (int a = 0; a < 3; ++a) acc[a] += term.coeff * g[a];
  }
  return acc;
}

double SpatialComponent::max_residual_at(const SpatialSample& s) const {
  double worst = 0.0;
  for (const ScalarConstraint& c : scalar_constraints) {
    worst = std::max(worst, std::abs(scalar_residual(s, c)));
  }
  for (const VectorConstraint& c : vector_constraints) {
    worst = std::max(worst, max_abs3(vector_residual(s, c)));
  }
  return worst;
}

std::vector<ConstraintSweep> constraint_sweep(
    const SpatialComponent& sc, const Vec3& lo, const Vec3& hi, int npts,
    std::uint64_t seed, const std::vector<ExprPtr>& exclusions) {
  std::vector<ConstraintSweep> out;
  for (const ScalarConstraint& c : sc.scalar_constraints) {
    out.push_back(ConstraintSweep{c.name, 0.0, {}});
  }
  for (const VectorConstraint& c : sc.vector_constraints) {
    out.push_back(ConstraintSweep{c.name, 0.0, {}});
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int budget = 4 * npts;
  int accepted = 0;
  for (int trial = 0; trial < budget && accepted < npts; ++trial) {
    Vec3 z{lo[0] + (hi[0] - lo[0]) * u01(rng),
           lo[1] + (hi[1] - lo[1]) * u01(rng),
           lo[2] + (hi[2] - lo[2]) * u01(rng)};
    Env<double> env{{"z1", z[0]}, {"z2", z[1]}, {"z3", z[2]}};
    bool usable = true;
    for (const ExprPtr& e : exclusions) {
      double val = eval(e, env);
      if (!std::isfinite(val) || std::abs(val) < 1e-3) {
        usable = false;
        break;
      }
    }
    if (!usable) continue;
    SpatialSample smp = sc.sample(z);
    for (int i = 0; i < sc.m && usable; ++i) {
      if (!std::isfinite(smp.v[i])) usable = false;
      for (int a = 0; a < 3; ++a) {
        if (!std::isfinite(smp.dv[i][a])) usable = false;
      }
    }
    if (!usable) continue;
    ++accepted;
    std::size_t slot = 0;
    for (const ScalarConstraint& c : sc.scalar_constraints) {
      double r = std::abs(sc.scalar_residual(smp, c));
      if (r > out[slot].max_abs) {
        out[slot].max_abs = r;
        out[slot].argmax = z;
      }
      ++slot;
    }
    for (const VectorConstraint& c : sc.vector_constraints) {
      double r = max_abs3(sc.vector_residual(smp, c));
      if (r > out[slot].max_abs) {
        out[slot].max_abs = r;
        out[slot].argmax = z;
      }
      ++slot;
    }
  }
  if (accepted < (npts + 1) / 2) {
    std::ostringstream os;
    os << "domain: only " << accepted << " of " << npts
       << " sweep points were usable (exclusions too tight or components "
          "non-finite on the box)";
    throw ConfigError(os.str());
  }
  return out;
}

double max_constraint_residual(const SpatialComponent& sc, const Vec3& lo,
                               const Vec3& hi, int npts, std::uint64_t seed,
                               const std::vector<ExprPtr>& exclusions) {
  double worst = 0.0;
  for (const ConstraintSweep& s :
       constraint_sweep(sc, lo, hi, npts, seed, exclusions)) {
    worst = std::max(worst, s.max_abs);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Builders.
// ---------------------------------------------------------------------------

SpatialComponent spatial_kirchhoff() {
  return finish(3, {z1(), z2(), z3(), nullptr, nullptr, nullptr});
}

SpatialComponent spatial_graph4(const ExprPtr& f) {
  require_alphabet(f, "functions.f", {"z2", "z3"});
  SpatialComponent sc = finish(4, {z1(), z2(), z3(), f, nullptr, nullptr});
  sc.scalar_constraints = {scal("g234", {{2, 3, 4, 1.0}})};
  return sc;
}

SpatialComponent spatial_elliptic5(const AntiCrPair& pair) {
  require_alphabet(pair.p1, "functions.w", {"z1", "z2", "z3"});
  require_alphabet(pair.p2, "functions.w", {"z1", "z2", "z3"});
  require_anti_cr(pair, "functions.w");
  SpatialComponent sc =
      finish(5, {z1(), z2(), z3(), pair.p1, pair.p2, nullptr});
  sc.scalar_constraints = {
      scal("g134+g235", {{1, 3, 4, 1.0}, {2, 3, 5, 1.0}}),
      scal("g135-g234", {{1, 3, 5, 1.0}, {2, 3, 4, -1.0}}),
      scal("g314+g325", {{3, 1, 4, 1.0}, {3, 2, 5, 1.0}}),
      scal("g315-g324", {{3, 1, 5, 1.0}, {3, 2, 4, -1.0}}),
  };
  return sc;
}

SpatialComponent spatial_hyperbolic5(const ExprPtr& f1, const ExprPtr& f2) {
  require_alphabet(f1, "functions.f1", {"z1", "z3"});
  require_alphabet(f2, "functions.f2", {"z2", "z3"});
  SpatialComponent sc = finish(5, {z1(), z2(), z3(), f1, f2, nullptr});
  sc.scalar_constraints = {
      scal("g134", {{1, 3, 4, 1.0}}),
      scal("g235", {{2, 3, 5, 1.0}}),
  };
  return sc;
}

SpatialComponent spatial_parabolic5(const ExprPtr& f1, const ExprPtr& f2) {
  require_alphabet(f1, "functions.f1", {"z1", "z3"});
  require_alphabet(f2, "functions.f2", {"z1", "z3"});
  ExprPtr v4 = make_add(f1, make_mul(z2(), differentiate(f2, "z1")));
  SpatialComponent sc = finish(5, {z1(), z2(), z3(), v4, f2, nullptr});
  sc.scalar_constraints = {
      scal("g135", {{1, 3, 5, 1.0}}),
      scal("g134+g235", {{1, 3, 4, 1.0}, {2, 3, 5, 1.0}}),
  };
  return sc;
}

SpatialComponent spatial_axis6(const ExprPtr& f1, const ExprPtr& f2,
                               const ExprPtr& f3) {
  require_alphabet(f1, "functions.f1", {"z1"});
  require_alphabet(f2, "functions.f2", {"z2"});
  require_alphabet(f3, "functions.f3", {"z3"});
  SpatialComponent sc = finish(6, {z1(), z2(), z3(), f1, f2, f3});
  sc.vector_constraints = {
      vect("G14", {{1, 4, 1.0}}),
      vect("G25", {{2, 5, 1.0}}),
      vect("G36", {{3, 6, 1.0}}),
  };
  sc.scalar_constraints = {
      scal("g125", {{1, 2, 5, 1.0}}), scal("g134", {{1, 3, 4, 1.0}}),
      scal("g145", {{1, 4, 5, 1.0}}), scal("g236", {{2, 3, 6, 1.0}}),
      scal("g256", {{2, 5, 6, 1.0}}), scal("g346", {{3, 4, 6, 1.0}}),
  };
  return sc;
}

SpatialComponent spatial_elliptic6(const ExprPtr& f1, const AntiCrPair& pair) {
  require_alphabet(f1, "functions.f1", {"z3"});
  require_alphabet(pair.p1, "functions.w", {"z1", "z2"});
  require_alphabet(pair.p2, "functions.w", {"z1", "z2"});
  require_anti_cr(pair, "functions.w");
  SpatialComponent sc = finish(6, {z1(), z2(), z3(), f1, pair.p1, pair.p2});
  sc.vector_constraints = {
      vect("G34", {{3, 4, 1.0}}),
      vect("G15+G26", {{1, 5, 1.0}, {2, 6, 1.0}}),
      vect("G16-G25", {{1, 6, 1.0}, {2, 5, -1.0}}),
  };
  return sc;
}

SpatialComponent spatial_elliptic6_trig(const ExprPtr& f1,
                                        const AntiCrPair& pair) {
  require_alphabet(f1, "functions.f1", {"z3"});
  require_alphabet(pair.p1, "functions.w", {"z1", "z2"});
  require_alphabet(pair.p2, "functions.w", {"z1", "z2"});
  require_anti_cr(pair, "functions.w");
  SpatialComponent sc = finish(6, {z1(), z2(), z3(), f1, pair.p1, pair.p2});
  sc.scalar_constraints = {
      scal("g125+g345", {{1, 2, 5, 1.0}, {3, 4, 5, 1.0}}),
      scal("g126+g346", {{1, 2, 6, 1.0}, {3, 4, 6, 1.0}}),
      scal("g146-g135-g236-g245",
           {{1, 4, 6, 1.0}, {1, 3, 5, -1.0}, {2, 3, 6, -1.0}, {2, 4, 5, -1.0}}),
      scal("g145-g235+g136+g246",
           {{1, 4, 5, 1.0}, {2, 3, 5, -1.0}, {1, 3, 6, 1.0}, {2, 4, 6, 1.0}}),
  };
  return sc;
}

SpatialComponent spatial_parabolic6(const ExprPtr& f1, const ExprPtr& f2,
                                    const ExprPtr& f3) {
  require_alphabet(f1, "functions.f1", {"z3"});
  require_alphabet(f2, "functions.f2", {"z1"});
  require_alphabet(f3, "functions.f3", {"z1"});
  ExprPtr v5 = make_add(make_mul(z2(), differentiate(f3, "z1")), f2);
  SpatialComponent sc = finish(6, {z1(), z2(), z3(), f1, v5, f3});
  sc.vector_constraints = {
      vect("G15+G26", {{1, 5, 1.0}, {2, 6, 1.0}}),
      vect("G16", {{1, 6, 1.0}}),
      vect("G34", {{3, 4, 1.0}}),
  };
  sc.scalar_constraints = {
      scal("g126", {{1, 2, 6, 1.0}}),
      scal("g134", {{1, 3, 4, 1.0}}),
      scal("g135+g236", {{1, 3, 5, 1.0}, {2, 3, 6, 1.0}}),
      scal("g136", {{1, 3, 6, 1.0}}),
      scal("g146", {{1, 4, 6, 1.0}}),
      scal("g156", {{1, 5, 6, 1.0}}),
      scal("g256", {{2, 5, 6, 1.0}}),
  };
  return sc;
}

SpatialComponent spatial_parabolic6_general(const ExprPtr& f1,
                                            const ExprPtr& f2,
                                            const ExprPtr& f3) {
  require_alphabet(f1, "functions.f1", {"z1", "z2", "z3"});
  require_alphabet(f2, "functions.f2", {"z1", "z2", "z3"});
  require_alphabet(f3, "functions.f3", {"z1", "z2", "z3"});
  SpatialComponent sc = finish(6, {z1(), z2(), z3(), f1, f2, f3});
  sc.scalar_constraints = {
      scal("g135", {{1, 3, 5, 1.0}}),
      scal("g246", {{2, 4, 6, 1.0}}),
      scal("g136+g145+g235", {{1, 3, 6, 1.0}, {1, 4, 5, 1.0}, {2, 3, 5, 1.0}}),
  };
  return sc;
}

namespace {

/// Shared constraint set of the hyperbolic extension shape.
void install_hyperbolic_ext_constraints(SpatialComponent& sc) {
  sc.scalar_constraints = {
      scal("g125", {{1, 2, 5, 1.0}}),
      scal("g346", {{3, 4, 6, 1.0}}),
      scal("g236-g134", {{2, 3, 6, 1.0}, {1, 3, 4, -1.0}}),
      scal("g145+g256", {{1, 4, 5, 1.0}, {2, 5, 6, 1.0}}),
  };
}

/// q1 must be a*s^n with integer n >= 2 (optionally negated or with the
/// coefficient on either side).  Returns {a, n}.
std::pair<double, int> detect_monomial(const ExprPtr& q1) {
  double a = 1.0;
  const Expr* e = q1.get();
  while (e->kind == ExprKind::Neg) {
    a = -a;
    e = e->a.get();
  }
  if (e->kind == ExprKind::Mul) {
    const Expr* lhs = e->a.get();
    const Expr* rhs = e->b.get();
    if (lhs->kind == ExprKind::Number) {
      a *= lhs->number;
      e = rhs;
    } else if (rhs->kind == ExprKind::Number) {
      a *= rhs->number;
      e = lhs;
    } else {
      throw ConfigError(
          "functions.q1: must be a monomial a*s^n with integer n >= 2");
    }
    while (e->kind == ExprKind::Neg) {
      a = -a;
      e = e->a.get();
    }
  }
  if (e->kind != ExprKind::Pow || e->a->kind != ExprKind::Symbol ||
      e->a->symbol != "s" || e->exponent < 2) {
    throw ConfigError(
        "functions.q1: must be a monomial a*s^n with integer n >= 2");
  }
  return {a, e->exponent};
}

}  // namespace

SpatialComponent hyperbolic_extension_build(const ExprPtr& g,
                                            const ExprPtr& q1,
                                            const ExprPtr& q) {
  require_alphabet(g, "functions.g", {"z1", "z2"});
  require_alphabet(q1, "functions.q1", {"s"});
  require_alphabet(q, "functions.q", {"z3"});

  ExprPtr g10 = differentiate(g, "z1");
  ExprPtr g01 = differentiate(g, "z2");

  // The profile must ride its own characteristics: g_01 + g * g_10 = 0.
  {
    std::mt19937_64 rng(0x7a115eedULL);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    int valid = 0;
    for (int i = 0; i < 50; ++i) {
      Env<double> env{{"z1", u(rng)}, {"z2", u(rng)}};
      double gv = eval(g, env);
      double gx = eval(g10, env);
      double gy = eval(g01, env);
      if (!std::isfinite(gv) || !std::isfinite(gx) || !std::isfinite(gy)) {
        continue;
      }
      ++valid;
      double r = std::abs(gy + gv * gx) / (1.0 + std::abs(gy) +
                                           std::abs(gv * gx));
      worst = std::max(worst, r);
    }
    if (valid < 25) {
      throw ConfigError(
          "functions.g: could not sample the transport residual (profile "
          "non-finite on most of the box)");
    }
    if (worst > 1e-8) {
      std::ostringstream os;
      os << "functions.g: profile does not satisfy its transport equation "
         << "(max residual " << worst << ")";
      throw ConfigError(os.str());
    }
  }

  if (!references(g, "z1") && !references(g, "z2")) {
    // Constant profile gamma0: straight-line level sets z1 - gamma0*z2.
    Env<double> env;
    double gamma0 = eval(g, env);
    ExprPtr u = make_sub(z1(), make_mul(make_number(gamma0), z2()));
    ExprPtr q1u = substitute(q1, "s", u);
    ExprPtr f1 = make_mul(q1u, q);
    ExprPtr f3 = make_mul(make_number(gamma0), make_mul(q1u, q));
    SpatialComponent sc = finish(6, {z1(), z2(), z3(), f1, u, f3});
    install_hyperbolic_ext_constraints(sc);
    return sc;
  }

  // Fractional profile (z1 - c1)/(z2 - c2): recover the centre from the
  // value and z1-slope at a base point, then confirm on a sweep.
  double c1 = 0.0, c2 = 0.0;
  {
    const double base[][2] = {{0.3, 0.7},  {-0.4, 0.2}, {0.8, -0.6},
                              {0.1, 0.9},  {-0.7, -0.3}, {0.55, 0.15}};
    bool found = false;
    for (const auto& b : base) {
      Env<double> env{{"z1", b[0]}, {"z2", b[1]}};
      double gv = eval(g, env);
      double gx = eval(g10, env);
      if (!std::isfinite(gv) || !std::isfinite(gx) || std::abs(gx) < 1e-6) {
        continue;
      }
      c2 = b[1] - 1.0 / gx;
      c1 = b[0] - gv / gx;
      found = true;
      break;
    }
    if (!found) {
      throw ConfigError(
          "functions.g: profile is neither constant nor a recoverable "
          "fraction (z1-c1)/(z2-c2)");
    }
    std::mt19937_64 rng(0x7a115eefULL);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    int valid = 0;
    for (int i = 0; i < 50 || valid < 25; ++i) {
      if (i >= 200) break;
      double p = u(rng), r = u(rng);
      if (std::abs(p - c1) < 1e-3 || std::abs(r - c2) < 1e-3) continue;
      Env<double> env{{"z1", p}, {"z2", r}};
      double gv = eval(g, env);
      if (!std::isfinite(gv)) continue;
      ++valid;
      double model = (p - c1) / (r - c2);
      worst = std::max(worst, std::abs(gv - model) / (1.0 + std::abs(gv)));
    }
    if (valid < 25 || worst > 1e-8) {
      std::ostringstream os;
      os << "functions.g: profile is not of the form (z1-c1)/(z2-c2) "
         << "(max mismatch " << worst << ")";
      throw ConfigError(os.str());
    }
  }

  auto [a, n] = detect_monomial(q1);
  ExprPtr u1 = make_sub(z1(), make_number(c1));
  ExprPtr u2 = make_sub(z2(), make_number(c2));
  ExprPtr s_expr = make_div(u2, u1);
  ExprPtr f1 = make_mul(make_number(a), make_mul(make_pow(s_expr, n), q));
  ExprPtr f2 = make_mul(u1, make_pow(s_expr, n));
  ExprPtr f3 = make_mul(make_number(a * n / (n - 1.0)),
                        make_mul(make_pow(s_expr, n - 1), q));
  SpatialComponent sc = finish(6, {z1(), z2(), z3(), f1, f2, f3});
  install_hyperbolic_ext_constraints(sc);
  return sc;
}

ParabolicExtension parabolic_extension_build(const ExprPtr& F,
                                             const ExprPtr& f2,
                                             const ExprPtr& g) {
  require_alphabet(F, "functions.F", {"s", "z2"});
  require_alphabet(f2, "functions.f2", {"z1", "z3"});
  require_alphabet(g, "functions.g", {"z1", "z3"});

  ExprPtr f1 = substitute(F, "s", g);
  ExprPtr f3 = make_add(
      make_add(make_mul(z2(), differentiate(f2, "z1")),
               make_mul(f1, differentiate(f2, "z3"))),
      g);

  ParabolicExtension ext;
  ext.sc = spatial_parabolic6_general(f1, f2, f3);
  std::vector<ConstraintSweep> sweep = constraint_sweep(
      ext.sc, Vec3{-1.0, -1.0, -1.0}, Vec3{1.0, 1.0, 1.0}, 200, 0x9a7ab01aULL);
  for (int i = 0; i < 3; ++i) ext.residuals[i] = sweep[i].max_abs;
  return ext;
}

}  // namespace lagrflow
