#pragma once
// ---------------------------------------------------------------------------
// Spatial component v : R^3 -> R^m of a separated flow map phi = A(t) v(z).
//
// A SpatialComponent carries the m component expressions, their symbolic
// gradients, and the family's spatial constraint sets: scalar combinations of
// the minors g_ijk = det(grad v^i, grad v^j, grad v^k) and vector
// combinations of the two-form coefficients G_ij = grad v^i x grad v^j that
// must vanish identically on the domain.  The constraints are exactly the
// conditions that make the volume coefficient and the invariant two-form of
// the flow map time-independent once the matching minors of A(t) are pinned.
// ---------------------------------------------------------------------------

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lagrflow/expr.hpp"
#include "lagrflow/smallmath.hpp"

namespace lagrflow {

/// One term of a scalar constraint: coeff * g_(i,j,k); indices are 1-based
/// component numbers and keep their written order (odd permutations flip the
/// sign of the minor, so "g314" is a legal term meaning -g134).
struct TripleTerm {
  int i = 0, j = 0, k = 0;
  double coeff = 1.0;
};

struct ScalarConstraint {
  std::string name;  ///< e.g. "g134+g235"
  std::vector<TripleTerm> terms;
};

/// One term of a vector constraint: coeff * G_(i,j).
struct PairTerm {
  int i = 0, j = 0;
  double coeff = 1.0;
};

struct VectorConstraint {
  std::string name;  ///< e.g. "G15+G26"
  std::vector<PairTerm> terms;
};

/// Component values and gradients of v at a single point z; computed once per
/// point and reused across every minor/two-form query and every time sample.
struct SpatialSample {
  Vec3 z{};
  std::array<double, 6> v{};
  std::array<Vec3, 6> dv{};
};

struct SpatialComponent {
  int m = 0;
  std::array<ExprPtr, 6> component{};              ///< v^1..v^m
  std::array<std::array<ExprPtr, 3>, 6> gradient{};  ///< d v^i / d z_a
  std::vector<ScalarConstraint> scalar_constraints;
  std::vector<VectorConstraint> vector_constraints;

  SpatialSample sample(const Vec3& z) const;

  /// g_(i,j,k) in the order written (1-based indices).
  double minor3(const SpatialSample& s, int i, int j, int k) const;

  /// G_(i,j) = grad v^i x grad v^j (1-based indices).
  Vec3 two_form(const SpatialSample& s, int i, int j) const;

  double scalar_residual(const SpatialSample& s, const ScalarConstraint& c) const;
  Vec3 vector_residual(const SpatialSample& s, const VectorConstraint& c) const;

  /// Largest absolute residual over every constraint of both kinds at z.
  double max_residual_at(const SpatialSample& s) const;
};

/// Per-constraint maximum over a random sweep of the box [lo, hi].
struct ConstraintSweep {
  std::string name;
  double max_abs = 0.0;
  Vec3 argmax{};
};

/// Sample `npts` points of the box (seeded, reproducible), skipping points
/// where any exclusion expression is smaller than 1e-3 in absolute value or
/// where the component evaluation is non-finite.  Throws ConfigError if fewer
/// than half the candidate points are usable.
std::vector<ConstraintSweep> constraint_sweep(
    const SpatialComponent& sc, const Vec3& lo, const Vec3& hi, int npts,
    std::uint64_t seed, const std::vector<ExprPtr>& exclusions = {});

/// Convenience: largest max_abs over constraint_sweep.
double max_constraint_residual(const SpatialComponent& sc, const Vec3& lo,
                               const Vec3& hi, int npts, std::uint64_t seed,
                               const std::vector<ExprPtr>& exclusions = {});

// ---------------------------------------------------------------------------
// Family builders.  Each validates the variable usage of its inputs (throwing
// ConfigError with the offending field) and installs the family's constraint
// sets.  Component 1..3 is always the identity (z1, z2, z3).
// ---------------------------------------------------------------------------

/// m=3: v = z, no extra components, no constraints.
SpatialComponent spatial_kirchhoff();

/// m=4: v = (z, f(z2,z3)).  Constraint: g234 = 0 (f must not depend on z1).
SpatialComponent spatial_graph4(const ExprPtr& f);

/// m=5 elliptic: v = (z, p1, p2) with (p1, p2) an anti-CR pair (z3-only
/// additive extras allowed).  Constraints: g134+g235, g135-g234 and the
/// in-plane two-form combinations g314+g325, g315-g324.
SpatialComponent spatial_elliptic5(const AntiCrPair& pair);

/// m=5 hyperbolic: v = (z, f1(z1,z3), f2(z2,z3)).  Constraints: g134, g235.
SpatialComponent spatial_hyperbolic5(const ExprPtr& f1, const ExprPtr& f2);

/// m=5 parabolic: v = (z, f1 + z2*d_z1 f2, f2) with f1, f2 in (z1,z3).
/// Constraints: g135, g134+g235.
SpatialComponent spatial_parabolic5(const ExprPtr& f1, const ExprPtr& f2);

/// m=6 axis-separated: v = (z, f1(z1), f2(z2), f3(z3)).
/// Constraints: G14, G25, G36 and g125, g134, g145, g236, g256, g346.
SpatialComponent spatial_axis6(const ExprPtr& f1, const ExprPtr& f2,
                               const ExprPtr& f3);

/// m=6 elliptic: v = (z, f1(z3), p1(z1,z2), p2(z1,z2)) with (p1,p2) a strict
/// anti-CR pair (no z3 extras).  Constraints: G34, G15+G26, G16-G25.
SpatialComponent spatial_elliptic6(const ExprPtr& f1, const AntiCrPair& pair);

/// Same shape as spatial_elliptic6, paired with the rotating closed-form time
/// matrix; the constraint set is the scalar quartet g125+g345, g126+g346,
/// g146-g135-g236-g245, g145-g235+g136+g246.
SpatialComponent spatial_elliptic6_trig(const ExprPtr& f1,
                                        const AntiCrPair& pair);

/// m=6 parabolic: v = (z, f1(z3), z2*f3'(z1) + f2(z1), f3(z1)).
/// Constraints: G15+G26, G16, G34 and the scalar zeros g126, g134,
/// g135+g236, g136, g146, g156, g256.
SpatialComponent spatial_parabolic6(const ExprPtr& f1, const ExprPtr& f2,
                                    const ExprPtr& f3);

/// m=6 parabolic extension shape: v = (z, f1, f2, f3) with general
/// dependence; constraint set g135, g246, g136+g145+g235.
SpatialComponent spatial_parabolic6_general(const ExprPtr& f1,
                                            const ExprPtr& f2,
                                            const ExprPtr& f3);

/// m=6 hyperbolic extension: build (f1, f2, f3) from a steady profile g
/// (either a constant or a fraction (z1-c1)/(z2-c2), validated against its
/// transport equation g_01 + g*g_10 = 0), a monomial q1 = a*s^n (n >= 2) and
/// a z3 profile q.  Constraint set: g125, g346, g236-g134, g145+g256.
SpatialComponent hyperbolic_extension_build(const ExprPtr& g,
                                            const ExprPtr& q1,
                                            const ExprPtr& q);

/// m=6 parabolic extension builder: f1 = F(s -> g(z1,z3), z2),
/// f3 = z2*f2_100 + f1*f2_001 + g.  Reports the residuals of the three
/// constraint expressions over a seeded sweep; the caller decides whether
/// they are acceptable.
struct ParabolicExtension {
  SpatialComponent sc;
  std::array<double, 3> residuals{};
};
ParabolicExtension parabolic_extension_build(const ExprPtr& F,
                                             const ExprPtr& f2,
                                             const ExprPtr& g);

}  // namespace lagrflow
