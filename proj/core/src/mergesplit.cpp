#include "redistrict/mergesplit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "redistrict/error.hpp"
#include "redistrict/parity.hpp"
#include "redistrict/random.hpp"
#include "redistrict/spanning_tree.hpp"
#include "sampler_util.hpp"

namespace redistrict {

namespace {

std::vector<std::pair<int, int>> adjacent_pairs(const RegionGraph& graph, const std::vector<int>& labels) {
  std::set<std::pair<int, int>> pairs;
  for (const auto& [u, v] : graph.edges()) {
    const int a = labels[static_cast<std::size_t>(u)];
    const int b = labels[static_cast<std::size_t>(v)];
    if (a != b) pairs.insert(std::minmax(a, b));
  }
  return {pairs.begin(), pairs.end()};
}

// Upper bound on the usable cuts of any spanning tree of `merged`. Usable
// edges have subtree populations inside a window; such subtrees are nested
// or disjoint, so they split into at most `width` chains (disjoint ones each
// hold at least `lo`) of at most `depth` links (nested ones differ by at
// least the smallest precinct). Depends only on the merged region.
std::size_t usable_cut_bound(const std::vector<int>& merged, std::span<const std::int64_t> pops, double target,
                             double tolerance) {
  const std::size_t edges = merged.size() - 1;
  std::int64_t total = 0;
  std::int64_t smallest = std::numeric_limits<std::int64_t>::max();
  for (int v : merged) {
    total += pops[static_cast<std::size_t>(v)];
    smallest = std::min(smallest, pops[static_cast<std::size_t>(v)]);
  }
  const double lo = std::max(target * (1.0 - tolerance), static_cast<double>(total) - target * (1.0 + tolerance));
  const double hi = std::min(target * (1.0 + tolerance), static_cast<double>(total) - target * (1.0 - tolerance));
  if (smallest <= 0 || !(lo > 0.0) || hi < lo) return edges;
  const double width = std::floor(static_cast<double>(total) / lo + 1e-9);
  const double depth = std::floor((hi - lo) / static_cast<double>(smallest) + 1e-9) + 1.0;
  const double bound = width * depth;
  return bound < static_cast<double>(edges) ? static_cast<std::size_t>(bound) : edges;
}

}  // namespace

std::string plan_violation(const RegionGraph& graph, const PopulationScenario& scenario, const Plan& plan,
                           const ConstraintConfig& config) {
  try {
    validate_plan_labels(graph, plan);
  } catch (const ValidationError& e) {
    return e.what();
  }
  const auto parts = contiguity_check(graph, plan);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (!parts[k]) return "district " + std::to_string(k + 1) + " is not contiguous";
  }
  const auto dev = metrics::parity_deviation(plan, scenario).max_deviation;
  if (dev > config.pop_tolerance) {
    return "parity deviation " + std::to_string(dev) + " exceeds tolerance " + std::to_string(config.pop_tolerance);
  }
  if (config.max_county_splits) {
    const int splits = metrics::county_splits(plan, graph);
    if (splits > *config.max_county_splits) {
      return std::to_string(splits) + " county splits exceed the cap of " + std::to_string(*config.max_county_splits);
    }
  }
  return {};
}

PlanEnsemble mergesplit_chain(const RegionGraph& graph, const PopulationScenario& scenario, const Plan& initial_plan,
                              const ConstraintConfig& config, const ChainOptions& options, std::uint64_t seed) {
  config.validate();
  scenario.validate(graph);
  if (initial_plan.n_districts < 2) throw ValidationError("merge-split needs at least two districts");
  if (options.thin < 1) throw ValidationError("thin must be at least 1");
  if (const auto why = plan_violation(graph, scenario, initial_plan, config); !why.empty()) {
    throw ValidationError("invalid initial plan: " + why);
  }
  const std::size_t burn_in = options.burn_in.value_or(options.n_steps / 10);

  const int n_d = initial_plan.n_districts;
  const double target = ideal_population(scenario.total_population(), n_d);
  const auto& pops = scenario.population;

  Rng rng(seed);
  std::vector<int> labels = initial_plan.district;
  double energy = config.energy(initial_plan, graph, scenario);
  auto pairs = adjacent_pairs(graph, labels);

  PlanEnsemble ensemble;
  std::size_t accepted = 0;
  std::size_t proposals = 0;
  std::vector<double> cut_series;
  std::vector<int> merged;
  std::vector<int> proposal;

  for (std::size_t step = 1; step <= options.n_steps; ++step) {
    const auto [a, b] = pairs[rng.index(pairs.size())];
    merged.clear();
    for (std::size_t v = 0; v < labels.size(); ++v) {
      if (labels[v] == a || labels[v] == b) merged.push_back(static_cast<int>(v));
    }

    // Rejection loop: accept a tree with probability usable/bound, then a
    // uniform usable cut. Every usable (tree, edge) pair is then equally
    // likely, and the bound depends only on the merged region, so the
    // proposal ratio stays exact.
    const auto bound = usable_cut_bound(merged, pops, target, config.pop_tolerance);
    std::optional<std::pair<SpanningTree, TreeCut>> split;
    for (int attempt = 0; attempt < config.retry_budget && !split; ++attempt) {
      SpanningTree tree = uniform_spanning_tree(graph, merged, rng);
      auto cuts = balanced_cut_edges(tree, pops, target, config.pop_tolerance, 2);
      if (config.max_county_splits && !cuts.empty()) {
        std::erase_if(cuts, [&](const TreeCut& c) {
          proposal = labels;
          for (int v : merged) proposal[static_cast<std::size_t>(v)] = b;
          for (int v : tree.subtree(c.position)) proposal[static_cast<std::size_t>(v)] = a;
          return detail::partial_county_splits(graph, proposal) > *config.max_county_splits;
        });
      }
      if (cuts.empty()) continue;
      if (cuts.size() > bound) throw std::logic_error("usable cut bound violated");
      if (rng.uniform() * static_cast<double>(bound) >= static_cast<double>(cuts.size())) continue;
      const TreeCut cut = cuts[rng.index(cuts.size())];
      split.emplace(std::move(tree), cut);
    }

    if (split) {
      ++proposals;
      const auto& [tree, cut] = *split;
      const bool swap = rng.bernoulli(0.5);
      const int child_label = swap ? b : a;
      const int other_label = swap ? a : b;
      proposal = labels;
      for (int v : merged) proposal[static_cast<std::size_t>(v)] = other_label;
      for (int v : tree.subtree(cut.position)) proposal[static_cast<std::size_t>(v)] = child_label;

      const Plan candidate{n_d, proposal};
      const double new_energy = config.energy(candidate, graph, scenario);
      auto new_pairs = adjacent_pairs(graph, proposal);
      const int old_boundary = detail::boundary_between(graph, labels, a, b);
      const int new_boundary = detail::boundary_between(graph, proposal, a, b);
      const double log_alpha = (energy - new_energy) + std::log(static_cast<double>(pairs.size())) -
                               std::log(static_cast<double>(new_pairs.size())) +
                               std::log(static_cast<double>(old_boundary)) -
                               std::log(static_cast<double>(new_boundary));
      const double u = rng.uniform();
      if (log_alpha >= 0.0 || u < std::exp(log_alpha)) {
        labels.swap(proposal);
        pairs = std::move(new_pairs);
        energy = new_energy;
        ++accepted;
      }
    }

    if (step > burn_in && (step - burn_in) % options.thin == 0) {
      ensemble.plans.push_back(Plan{n_d, labels});
      cut_series.push_back(metrics::compactness_cut_edges(ensemble.plans.back(), graph));
    }
  }

  const auto n = ensemble.plans.size();
  ensemble.weights.assign(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
  ensemble.provenance.scenario_id = scenario.id;
  ensemble.provenance.tolerance = config.pop_tolerance;
  ensemble.provenance.sampler = "mergesplit";
  ensemble.provenance.constraints = config.to_json();
  ensemble.provenance.seed = seed;
  auto& diag = ensemble.provenance.diagnostics;
  diag["n_districts"] = n_d;
  diag["n_steps"] = options.n_steps;
  diag["thin"] = options.thin;
  diag["burn_in"] = burn_in;
  diag["recorded"] = n;
  diag["acceptance_rate"] = options.n_steps > 0 ? static_cast<double>(accepted) / static_cast<double>(options.n_steps) : 0.0;
  diag["proposal_rate"] = options.n_steps > 0 ? static_cast<double>(proposals) / static_cast<double>(options.n_steps) : 0.0;
  diag["ess_cut_edge_fraction"] = metrics::autocorrelation_ess(cut_series);
  return ensemble;
}

}  // namespace redistrict
