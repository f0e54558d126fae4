#include "redistrict/smc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "redistrict/error.hpp"
#include "redistrict/parallel.hpp"
#include "redistrict/parity.hpp"
#include "redistrict/random.hpp"
#include "redistrict/spanning_tree.hpp"
#include "sampler_util.hpp"

namespace redistrict {

namespace {

struct Particle {
  std::vector<int> labels;     // 0 while unassigned
  std::vector<int> remainder;  // unassigned nodes
  double log_weight = 0.0;
  bool alive = true;
  int draws = 0;
};

struct StepContext {
  const RegionGraph& graph;
  const PopulationScenario& scenario;
  const ConstraintConfig& config;
  double target;
  int district;        // label assigned this generation
  int remaining;       // districts still to be drawn from the remainder, including this one
  std::uint64_t seed;
};

bool cut_respects_cap(const StepContext& ctx, const Particle& p, const SpanningTree& tree, const TreeCut& cut) {
  if (!ctx.config.max_county_splits) return true;
  std::vector<int> labels = p.labels;
  const bool child_is_district = cut.child_districts == 1;
  const int child_label = child_is_district ? ctx.district : (ctx.remaining == 2 ? ctx.district + 1 : 0);
  const int other_label = child_is_district ? (ctx.remaining == 2 ? ctx.district + 1 : 0) : ctx.district;
  for (int v : p.remainder) labels[static_cast<std::size_t>(v)] = other_label;
  for (int v : tree.subtree(cut.position)) labels[static_cast<std::size_t>(v)] = child_label;
  return detail::partial_county_splits(ctx.graph, labels) <= *ctx.config.max_county_splits;
}

void advance(const StepContext& ctx, Particle& p, std::size_t index) {
  Rng rng = Rng::substream(ctx.seed, static_cast<std::uint64_t>(ctx.district), index);
  const auto& pops = ctx.scenario.population;

  // Draw until two trees with a usable cut are seen; the first supplies the
  // split, the draw count gives the unbiased estimate 1/(K-1) of the chance
  // that a tree has any usable cut.
  int draws = 0;
  int successes = 0;
  SpanningTree chosen;
  std::vector<TreeCut> usable;
  while (draws < ctx.config.retry_budget) {
    SpanningTree tree = uniform_spanning_tree(ctx.graph, p.remainder, rng);
    ++draws;
    auto cuts = balanced_cut_edges(tree, pops, ctx.target, ctx.config.pop_tolerance, ctx.remaining);
    if (ctx.config.max_county_splits) {
      std::erase_if(cuts, [&](const TreeCut& c) { return !cut_respects_cap(ctx, p, tree, c); });
    }
    if (cuts.empty()) continue;
    if (++successes == 1) {
      chosen = std::move(tree);
      usable = std::move(cuts);
    } else {
      break;
    }
  }
  p.draws += draws;
  if (successes == 0) {
    p.alive = false;
    p.log_weight = -std::numeric_limits<double>::infinity();
    return;
  }
  const double p_hat = successes == 2 ? 1.0 / static_cast<double>(draws - 1) : 1.0 / static_cast<double>(draws);

  const TreeCut& cut = usable[rng.index(usable.size())];
  const bool child_is_district = cut.child_districts == 1;
  const int rest_label = ctx.remaining == 2 ? ctx.district + 1 : 0;
  for (int v : p.remainder) p.labels[static_cast<std::size_t>(v)] = child_is_district ? rest_label : ctx.district;
  for (int v : chosen.subtree(cut.position)) {
    p.labels[static_cast<std::size_t>(v)] = child_is_district ? ctx.district : rest_label;
  }
  std::vector<int> next_remainder;
  if (ctx.remaining > 2) {
    next_remainder.reserve(p.remainder.size());
    for (int v : p.remainder) {
      if (p.labels[static_cast<std::size_t>(v)] == 0) next_remainder.push_back(v);
    }
  }
  p.remainder = std::move(next_remainder);

  const int boundary = detail::boundary_between(ctx.graph, p.labels, ctx.district, rest_label);
  p.log_weight += std::log(static_cast<double>(usable.size())) + std::log(p_hat) -
                  std::log(static_cast<double>(boundary)) - ctx.config.compactness_weight * boundary;
}

// Number of district orders in which the plan can be peeled: every
// remainder left behind must stay connected. Particles carry ordered
// sequences, so each plan's mass is inflated by this count.
double peel_orders(const RegionGraph& graph, const std::vector<int>& labels, int n_districts) {
  std::vector<std::uint64_t> adj(static_cast<std::size_t>(n_districts), 0);
  for (const auto& [u, v] : graph.edges()) {
    const int a = labels[static_cast<std::size_t>(u)] - 1;
    const int b = labels[static_cast<std::size_t>(v)] - 1;
    if (a == b) continue;
    adj[static_cast<std::size_t>(a)] |= std::uint64_t{1} << b;
    adj[static_cast<std::size_t>(b)] |= std::uint64_t{1} << a;
  }
  auto connected = [&](std::uint64_t set) {
    std::uint64_t seen = set & (~set + 1);
    std::uint64_t frontier = seen;
    while (frontier) {
      std::uint64_t next = 0;
      for (std::uint64_t f = frontier; f; f &= f - 1) next |= adj[static_cast<std::size_t>(std::countr_zero(f))];
      frontier = next & set & ~seen;
      seen |= frontier;
    }
    return seen == set;
  };
  std::unordered_map<std::uint64_t, double> memo;
  auto count = [&](auto&& self, std::uint64_t set) -> double {
    if (std::popcount(set) <= 2) return 1.0;  // the last cut yields both districts at once
    if (const auto it = memo.find(set); it != memo.end()) return it->second;
    double n = 0.0;
    for (std::uint64_t f = set; f; f &= f - 1) {
      const std::uint64_t rest = set & ~(f & (~f + 1));
      if (connected(rest)) n += self(self, rest);
    }
    memo.emplace(set, n);
    return n;
  };
  const std::uint64_t all = n_districts == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_districts) - 1;
  return count(count, all);
}

std::vector<double> normalized_weights(const std::vector<Particle>& particles) {
  double max_log = -std::numeric_limits<double>::infinity();
  for (const auto& p : particles) max_log = std::max(max_log, p.log_weight);
  std::vector<double> w(particles.size(), 0.0);
  if (!std::isfinite(max_log)) return w;
  double sum = 0.0;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    w[i] = particles[i].alive ? std::exp(particles[i].log_weight - max_log) : 0.0;
    sum += w[i];
  }
  for (auto& x : w) x /= sum;
  return w;
}

std::vector<std::size_t> systematic_resample(const std::vector<double>& weights, Rng& rng) {
  const auto n = weights.size();
  std::vector<std::size_t> picks(n);
  const double step = 1.0 / static_cast<double>(n);
  double u = rng.uniform() * step;
  double cumulative = weights[0];
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (u > cumulative && j + 1 < n) cumulative += weights[++j];
    // Never land on a zero-weight particle because of rounding in the running sum.
    while (weights[j] == 0.0 && j + 1 < n) cumulative += weights[++j];
    picks[i] = j;
    u += step;
  }
  return picks;
}

}  // namespace

PlanEnsemble sample_plans_smc(const RegionGraph& graph, const PopulationScenario& scenario, int n_districts,
                              const ConstraintConfig& config, std::size_t n_plans, std::uint64_t seed,
                              const SmcOptions& options) {
  config.validate();
  scenario.validate(graph);
  if (n_districts < 2) throw ValidationError("n_districts must be at least 2");
  if (n_districts > 64) throw ValidationError("the SMC sampler supports at most 64 districts");
  if (static_cast<std::size_t>(n_districts) > graph.num_nodes()) {
    throw ValidationError("n_districts exceeds the number of precincts");
  }
  if (n_plans == 0) throw ValidationError("n_plans must be positive");
  const auto total_pop = scenario.total_population();
  if (total_pop <= 0) throw ValidationError("scenario '" + scenario.id + "' has zero total population");

  const double target = ideal_population(total_pop, n_districts);

  std::vector<int> all(graph.num_nodes());
  std::iota(all.begin(), all.end(), 0);
  std::vector<Particle> particles(n_plans, Particle{std::vector<int>(graph.num_nodes(), 0), all, 0.0, true, 0});

  nlohmann::ordered_json generations = nlohmann::ordered_json::array();
  for (int k = 1; k < n_districts; ++k) {
    const StepContext ctx{graph, scenario, config, target, k, n_districts - k + 1, seed};
    parallel_for(
        particles.size(), [&](std::size_t i) { advance(ctx, particles[i], i); }, options.threads);

    const auto dead = static_cast<std::size_t>(
        std::count_if(particles.begin(), particles.end(), [](const Particle& p) { return !p.alive; }));
    if (dead == particles.size()) {
      throw InfeasibleError("no particle found a balanced cut for district " + std::to_string(k) + " within " +
                            std::to_string(config.retry_budget) + " spanning-tree draws (tolerance " +
                            std::to_string(config.pop_tolerance) + ")");
    }

    const auto weights = normalized_weights(particles);
    const double ess = metrics::effective_sample_size(weights);
    const bool last = k == n_districts - 1;
    const bool resample = dead > 0 || (!last && ess < options.resample_threshold * static_cast<double>(n_plans));
    generations.push_back({{"district", k}, {"ess", ess}, {"dropped", dead}, {"resampled", resample}});
    if (resample) {
      Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(k), 0xffffffffULL);
      const auto picks = systematic_resample(weights, rng);
      std::vector<Particle> next;
      next.reserve(particles.size());
      for (auto j : picks) {
        next.push_back(particles[j]);
        next.back().log_weight = 0.0;
      }
      particles = std::move(next);
    }
  }

  for (auto& p : particles) {
    if (p.alive) p.log_weight -= std::log(peel_orders(graph, p.labels, n_districts));
  }

  if (config.vra_weight > 0.0 && config.vra_target_mmds) {
    for (auto& p : particles) {
      const Plan plan{n_districts, p.labels};
      const int shortfall = std::max(0, *config.vra_target_mmds - metrics::mmd_count(plan, scenario, config.mmd));
      p.log_weight -= config.vra_weight * shortfall;
    }
  }

  PlanEnsemble ensemble;
  ensemble.weights = normalized_weights(particles);
  ensemble.plans.reserve(particles.size());
  long total_draws = 0;
  for (auto& p : particles) {
    ensemble.plans.push_back(Plan{n_districts, std::move(p.labels)});
    total_draws += p.draws;
  }
  ensemble.provenance.scenario_id = scenario.id;
  ensemble.provenance.tolerance = config.pop_tolerance;
  ensemble.provenance.sampler = "smc";
  ensemble.provenance.constraints = config.to_json();
  ensemble.provenance.seed = seed;
  ensemble.provenance.diagnostics["n_districts"] = n_districts;
  ensemble.provenance.diagnostics["n_plans"] = n_plans;
  ensemble.provenance.diagnostics["ess"] = metrics::effective_sample_size(ensemble.weights);
  ensemble.provenance.diagnostics["mean_tree_draws"] =
      static_cast<double>(total_draws) / static_cast<double>(particles.size());
  ensemble.provenance.diagnostics["generations"] = std::move(generations);
  return ensemble;
}

Plan district_labels_canonicalize(const Plan& plan) {
  std::vector<int> relabel(static_cast<std::size_t>(plan.n_districts) + 1, 0);
  int next = 0;
  Plan out{plan.n_districts, plan.district};
  for (auto& d : out.district) {
    auto& slot = relabel[static_cast<std::size_t>(d)];
    if (slot == 0) slot = ++next;
    d = slot;
  }
  return out;
}

}  // namespace redistrict
