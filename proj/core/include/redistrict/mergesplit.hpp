#pragma once

#include <cstdint>
#include <optional>

#include "redistrict/constraints.hpp"
#include "redistrict/graph.hpp"

namespace redistrict {

struct ChainOptions {
  std::size_t n_steps = 1000;
  std::size_t thin = 1;
  /// Steps discarded before recording; defaults to 10% of n_steps.
  std::optional<std::size_t> burn_in;
};

/// Merge-Split Markov chain.
///
/// Each step merges a uniformly chosen pair of adjacent districts, draws
/// uniform spanning trees of the merged region until one is accepted with
/// probability (usable cuts)/B, where B bounds the usable cuts of any tree of
/// that region, splits it at a uniformly chosen usable cut and accepts by
/// Metropolis-Hastings. The stationary law is
/// proportional to the product of the districts' spanning-tree counts times
/// exp(-energy), the same target as sample_plans_smc.
///
/// Records the state after every `thin`-th post-burn-in step with equal weight.
PlanEnsemble mergesplit_chain(const RegionGraph& graph, const PopulationScenario& scenario, const Plan& initial_plan,
                              const ConstraintConfig& config, const ChainOptions& options, std::uint64_t seed);

/// Validity under the hard constraints: labels, contiguity, parity within
/// tolerance and the county cap. Returns an empty string when valid,
/// otherwise the reason.
std::string plan_violation(const RegionGraph& graph, const PopulationScenario& scenario, const Plan& plan,
                           const ConstraintConfig& config);

}  // namespace redistrict
