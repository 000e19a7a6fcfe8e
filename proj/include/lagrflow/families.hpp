#pragma once
// ---------------------------------------------------------------------------
// Solution families.  Each family couples a spatial component shape with a
// matching time component so that the volume factor and the invariant
// two-form coefficients are time-independent by construction.  A family is
// identified by a stable id, configured by a plain value bag (constants,
// function descriptors, initial values, horizon), and built into a FlowMap
// ready for verification or sampling.
// ---------------------------------------------------------------------------

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lagrflow/verify.hpp"

namespace lagrflow {

struct FamilyConfig {
  std::string family;
  std::map<std::string, double> constants;
  std::map<std::string, std::string> functions;
  std::map<std::string, double> initial;
  double t0 = 0.0;
  double t1 = 1.0;
  Vec3 box_lo{-1.0, -1.0, -1.0};
  Vec3 box_hi{1.0, 1.0, 1.0};
  int grid_n = 5;
  int grid_t = 20;
  std::uint64_t seed = 0;
  /// Replace the declared value of a named functional (e.g. "q12") without
  /// touching the construction; used as a negative control to show that the
  /// constancy checks actually bite.
  std::map<std::string, double> declare_override;

  std::string to_json() const;
  static FamilyConfig from_json(const std::string& text);
};

struct FamilyInfo {
  std::string id;
  int m = 0;
  std::string kind;    ///< "closed-form" or "ode"
  std::string anchor;  ///< one-line description of the construction
  std::string parameters;  ///< expected constants / functions / initial keys
};

/// All family ids in stable order.
const std::vector<FamilyInfo>& family_registry();
/// Lookup by id; throws ConfigError for unknown ids.
const FamilyInfo& family_info(const std::string& id);

/// Ready-to-run configuration with catalog parameter values.
FamilyConfig catalog_config(const std::string& id);
/// Catalog configuration with constants redrawn admissibly at random
/// (magnitudes in [0.3, 2.5], signs respecting the family's constraints).
FamilyConfig randomized_config(const std::string& id, std::uint64_t seed);

/// Build the solution; throws ConfigError with a field path for missing or
/// inadmissible parameters.
FlowMap build_solution(const FamilyConfig& cfg);

}  // namespace lagrflow
