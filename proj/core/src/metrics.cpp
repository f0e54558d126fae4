#include "redistrict/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "redistrict/error.hpp"
#include "redistrict/parity.hpp"

namespace redistrict::metrics {

MmdDefinition MmdDefinition::of(std::initializer_list<Race> races, double threshold) {
  MmdDefinition def;
  for (auto r : races) def.race_mask = static_cast<std::uint8_t>(def.race_mask | (1U << static_cast<unsigned>(r)));
  def.threshold = threshold;
  return def;
}

std::string MmdDefinition::name() const {
  std::string out;
  for (auto r : kAllRaces) {
    if (!includes(r)) continue;
    if (!out.empty()) out += '+';
    out += race_key(r);
  }
  return out.empty() ? "none" : out;
}

namespace {

void require_cover(const Plan& plan, std::size_t n, const std::string& scenario_id) {
  if (plan.district.size() != n) {
    throw ValidationError("scenario '" + scenario_id + "' covers " + std::to_string(n) + " precincts but plan has " +
                          std::to_string(plan.district.size()));
  }
}

}  // namespace

std::vector<std::int64_t> district_populations(const Plan& plan, const PopulationScenario& scenario) {
  require_cover(plan, scenario.population.size(), scenario.id);
  std::vector<std::int64_t> pops(static_cast<std::size_t>(plan.n_districts), 0);
  for (std::size_t v = 0; v < plan.district.size(); ++v) {
    pops[static_cast<std::size_t>(plan.district[v] - 1)] += scenario.population[v];
  }
  return pops;
}

ParityResult parity_deviation(const Plan& plan, const PopulationScenario& scenario) {
  const auto pops = district_populations(plan, scenario);
  const auto total = std::accumulate(pops.begin(), pops.end(), std::int64_t{0});
  if (total <= 0) throw ValidationError("scenario '" + scenario.id + "' has zero total population");
  const double target = ideal_population(total, plan.n_districts);
  ParityResult result;
  result.deviation.reserve(pops.size());
  for (auto p : pops) {
    result.deviation.push_back(relative_deviation(static_cast<double>(p), target));
    result.max_deviation = std::max(result.max_deviation, result.deviation.back());
  }
  return result;
}

Reevaluation reevaluate_ensemble(const PlanEnsemble& ensemble, const PopulationScenario& scenario, double tolerance) {
  Reevaluation out;
  out.max_deviation.reserve(ensemble.size());
  double invalid = 0.0;
  double total_weight = 0.0;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const double dev = parity_deviation(ensemble.plans[i], scenario).max_deviation;
    out.max_deviation.push_back(dev);
    total_weight += ensemble.weights[i];
    if (dev > tolerance) invalid += ensemble.weights[i];
  }
  out.invalid_fraction = total_weight > 0.0 ? invalid / total_weight : 0.0;
  return out;
}

int county_splits(const Plan& plan, const RegionGraph& graph) {
  std::vector<int> first(graph.num_counties(), 0);
  std::vector<char> split(graph.num_counties(), 0);
  for (std::size_t v = 0; v < plan.district.size(); ++v) {
    const auto c = static_cast<std::size_t>(graph.county_of(static_cast<int>(v)));
    if (first[c] == 0) {
      first[c] = plan.district[v];
    } else if (first[c] != plan.district[v]) {
      split[c] = 1;
    }
  }
  return static_cast<int>(std::count(split.begin(), split.end(), 1));
}

int cut_edge_count(const Plan& plan, const RegionGraph& graph) {
  int cut = 0;
  for (const auto& [u, v] : graph.edges()) {
    if (plan.district[static_cast<std::size_t>(u)] != plan.district[static_cast<std::size_t>(v)]) ++cut;
  }
  return cut;
}

double compactness_cut_edges(const Plan& plan, const RegionGraph& graph) {
  if (graph.num_edges() == 0) return 0.0;
  return static_cast<double>(cut_edge_count(plan, graph)) / static_cast<double>(graph.num_edges());
}

int dem_majority_seats(const Plan& plan, const RegionGraph& graph) {
  const auto nd = static_cast<std::size_t>(plan.n_districts);
  std::vector<std::int64_t> dem(nd, 0);
  std::vector<std::int64_t> rep(nd, 0);
  for (std::size_t v = 0; v < plan.district.size(); ++v) {
    const auto& node = graph.node(static_cast<int>(v));
    dem[static_cast<std::size_t>(plan.district[v] - 1)] += node.votes_dem;
    rep[static_cast<std::size_t>(plan.district[v] - 1)] += node.votes_rep;
  }
  int seats = 0;
  for (std::size_t k = 0; k < nd; ++k) {
    if (dem[k] + rep[k] == 0) {
      throw ValidationError("district " + std::to_string(k + 1) + " has no two-party votes");
    }
    // Strict majority, compared in integers: dem / (dem + rep) > 1/2.
    if (dem[k] > rep[k]) ++seats;
  }
  return seats;
}

std::vector<bool> mmd_districts(const Plan& plan, const PopulationScenario& scenario, const MmdDefinition& def) {
  require_cover(plan, scenario.race.size(), scenario.id);
  const auto nd = static_cast<std::size_t>(plan.n_districts);
  std::vector<std::int64_t> minority(nd, 0);
  std::vector<std::int64_t> pop(nd, 0);
  for (std::size_t v = 0; v < plan.district.size(); ++v) {
    const auto k = static_cast<std::size_t>(plan.district[v] - 1);
    for (auto r : kAllRaces) {
      const auto c = scenario.race[v][static_cast<std::size_t>(r)];
      pop[k] += c;
      if (def.includes(r)) minority[k] += c;
    }
  }
  std::vector<bool> out(nd, false);
  for (std::size_t k = 0; k < nd; ++k) {
    out[k] = pop[k] > 0 && static_cast<double>(minority[k]) > def.threshold * static_cast<double>(pop[k]);
  }
  return out;
}

int mmd_count(const Plan& plan, const PopulationScenario& scenario, const MmdDefinition& def) {
  const auto flags = mmd_districts(plan, scenario, def);
  return static_cast<int>(std::count(flags.begin(), flags.end(), true));
}

double hhi(const RaceCounts& counts) {
  const auto sum = total(counts);
  if (sum <= 0) throw ValidationError("HHI is undefined for an empty precinct");
  double h = 0.0;
  for (auto c : counts) {
    const double share = static_cast<double>(c) / static_cast<double>(sum);
    h += share * share;
  }
  return 100.0 * h;
}

std::vector<double> mmd_membership_prob(const PlanEnsemble& ensemble, const PopulationScenario& scenario,
                                        const MmdDefinition& def) {
  const auto n = scenario.population.size();
  std::vector<double> prob(n, 0.0);
  double total_weight = 0.0;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto& plan = ensemble.plans[i];
    const auto flags = mmd_districts(plan, scenario, def);
    const double w = ensemble.weights[i];
    total_weight += w;
    for (std::size_t v = 0; v < n; ++v) {
      if (flags[static_cast<std::size_t>(plan.district[v] - 1)]) prob[v] += w;
    }
  }
  if (total_weight > 0.0) {
    for (auto& p : prob) p /= total_weight;
  }
  return prob;
}

std::vector<double> prob_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("probability maps differ in length");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

std::map<int, double> seats_histogram(const PlanEnsemble& ensemble, const std::function<int(const Plan&)>& metric) {
  std::map<int, double> hist;
  double total_weight = 0.0;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    hist[metric(ensemble.plans[i])] += ensemble.weights[i];
    total_weight += ensemble.weights[i];
  }
  if (total_weight > 0.0) {
    for (auto& [k, v] : hist) v /= total_weight;
  }
  return hist;
}

ConfusionTable mmd_confusion(const PlanEnsemble& ensemble, const PopulationScenario& a, const PopulationScenario& b,
                             const MmdDefinition& def) {
  int n_d = 0;
  for (const auto& p : ensemble.plans) n_d = std::max(n_d, p.n_districts);
  ConfusionTable table;
  table.size = n_d + 1;
  const auto cells = static_cast<std::size_t>(table.size * table.size);
  table.percent.assign(cells, 0.0);
  table.row_weight.assign(static_cast<std::size_t>(table.size), 0.0);
  table.row_plans.assign(static_cast<std::size_t>(table.size), 0);

  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const int ia = mmd_count(ensemble.plans[i], a, def);
    const int ib = mmd_count(ensemble.plans[i], b, def);
    table.percent[static_cast<std::size_t>(ia * table.size + ib)] += ensemble.weights[i];
    table.row_weight[static_cast<std::size_t>(ia)] += ensemble.weights[i];
    ++table.row_plans[static_cast<std::size_t>(ia)];
  }
  for (int r = 0; r < table.size; ++r) {
    const double w = table.row_weight[static_cast<std::size_t>(r)];
    if (w <= 0.0) continue;
    for (int c = 0; c < table.size; ++c) table.percent[static_cast<std::size_t>(r * table.size + c)] *= 100.0 / w;
  }
  return table;
}

double effective_sample_size(std::span<const double> weights) {
  double s = 0.0;
  double s2 = 0.0;
  for (double w : weights) {
    s += w;
    s2 += w * w;
  }
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

double autocorrelation_ess(std::span<const double> series) {
  const auto n = series.size();
  if (n < 4) return static_cast<double>(n);
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  auto autocov = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) acc += (series[i] - mean) * (series[i + lag] - mean);
    return acc / static_cast<double>(n);
  };
  const double var = autocov(0);
  if (var <= 0.0) return static_cast<double>(n);

  // Sum consecutive autocorrelation pairs while they stay positive.
  double tau = -1.0;
  for (std::size_t lag = 0; lag + 1 < n; lag += 2) {
    const double pair = (autocov(lag) + autocov(lag + 1)) / var;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / static_cast<double>(n));
  return std::min(static_cast<double>(n), static_cast<double>(n) / tau);
}

}  // namespace redistrict::metrics
