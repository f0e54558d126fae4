#pragma once

#include <cstdint>

#include "redistrict/constraints.hpp"
#include "redistrict/graph.hpp"

namespace redistrict {

struct SmcOptions {
  /// Worker threads for particle propagation; 0 uses hardware concurrency.
  unsigned threads = 0;
  /// Resample when ESS falls below this fraction of the particle count.
  double resample_threshold = 0.5;
};

/// Sequential tree-split sampler.
///
/// Each of n_plans particles peels one district per generation off its
/// unassigned remainder: draw a uniform spanning tree of the remainder, pick
/// uniformly among its balanced (and county-cap respecting) cut edges, and
/// update the particle weight. Trees without a balanced cut are redrawn up to
/// `config.retry_budget` times; a particle that exhausts the budget is dropped
/// and replaced at the next resampling. Particles are resampled
/// systematically whenever the ESS drops below the threshold.
///
/// Incremental weights are c * p / |boundary| * exp(-compactness * |boundary|),
/// where c is the number of usable cuts in the chosen tree, |boundary| the
/// number of edges between the new district and the remainder, and p an
/// unbiased estimate of the chance a tree has any usable cut. In expectation
/// this targets plans with probability proportional to the product of the
/// districts' spanning-tree counts, times the soft-constraint factors.
///
/// Throws ValidationError for bad arguments and InfeasibleError when every
/// particle of a generation fails.
PlanEnsemble sample_plans_smc(const RegionGraph& graph, const PopulationScenario& scenario, int n_districts,
                              const ConstraintConfig& config, std::size_t n_plans, std::uint64_t seed,
                              const SmcOptions& options = {});

/// Relabels districts in order of their smallest node index, so plans equal
/// up to a label permutation compare equal.
Plan district_labels_canonicalize(const Plan& plan);

}  // namespace redistrict
