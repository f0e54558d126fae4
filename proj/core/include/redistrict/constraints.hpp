#pragma once

#include <optional>

#include <nlohmann/json.hpp>

#include "redistrict/metrics.hpp"

namespace redistrict {

/// Constraints shared by both samplers. Population parity and the county
/// cap are hard; compactness and the VRA shortfall are soft energy terms.
struct ConstraintConfig {
  double pop_tolerance = 0.01;
  std::optional<int> max_county_splits;
  /// Energy per cut edge: plan weight carries exp(-compactness_weight * cut edges).
  double compactness_weight = 0.0;
  /// Energy per missing MMD below vra_target_mmds.
  double vra_weight = 0.0;
  std::optional<int> vra_target_mmds;
  metrics::MmdDefinition mmd = metrics::MmdDefinition::black();
  /// Spanning-tree redraws allowed per particle step or chain proposal.
  int retry_budget = 1000;

  /// Throws ValidationError for negative or non-finite settings.
  void validate() const;

  /// Soft energy of a complete plan (lower is preferred).
  double energy(const Plan& plan, const RegionGraph& graph, const PopulationScenario& scenario) const;

  nlohmann::ordered_json to_json() const;
};

}  // namespace redistrict
