#include "redistrict/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "redistrict/csv.hpp"
#include "redistrict/error.hpp"
#include "redistrict/metrics.hpp"
#include "redistrict/random.hpp"

namespace redistrict::noise {

double geometric_alpha(double scale) { return scale > 0.0 ? std::exp(-1.0 / scale) : 0.0; }

std::vector<std::int64_t> controlled_round(std::span<const double> values, std::int64_t target_total) {
  std::vector<std::int64_t> out(values.size(), 0);
  if (values.empty()) {
    if (target_total != 0) throw ValidationError("cannot allocate a nonzero total over no cells");
    return out;
  }
  const double sum = std::accumulate(values.begin(), values.end(), 0.0);
  if (target_total == 0) return out;
  if (!(sum > 0.0)) throw ValidationError("controlled rounding needs a positive total");

  std::vector<double> remainder(values.size());
  std::int64_t assigned = 0;
  const double factor = static_cast<double>(target_total) / sum;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0.0) throw ValidationError("controlled rounding needs nonnegative values");
    const double scaled = values[i] * factor;
    out[i] = static_cast<std::int64_t>(std::floor(scaled));
    remainder[i] = scaled - static_cast<double>(out[i]);
    assigned += out[i];
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  // Floating error can leave the floors off by more than the cell count only
  // in pathological inputs; cycle through the order to stay exact regardless.
  std::int64_t residual = target_total - assigned;
  for (std::size_t k = 0; residual != 0; k = (k + 1) % order.size()) {
    const auto i = order[k];
    if (residual > 0) {
      ++out[i];
      --residual;
    } else if (out[i] > 0) {
      --out[i];
      ++residual;
    }
  }
  return out;
}

namespace {

std::size_t plurality(const RaceCounts& counts) {
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

}  // namespace

PopulationScenario perturb_scenario(const RegionGraph& graph, const PopulationScenario& scenario,
                                    const NoiseSpec& spec, std::string new_id) {
  scenario.validate(graph);
  if (!(spec.scale >= 0.0) || !std::isfinite(spec.scale)) throw ValidationError("noise scale must be finite and >= 0");

  const std::size_t n = graph.num_nodes();
  const double alpha = geometric_alpha(spec.scale);
  const double alpha_protected = geometric_alpha(spec.scale / 2.0);

  std::vector<std::array<std::int64_t, kNumRaces>> noisy = scenario.race;

  for (std::size_t level_index = 0; level_index < spec.levels.size(); ++level_index) {
    const auto level = spec.levels[level_index];
    if (alpha <= 0.0) break;
    if (level == Level::County) {
      std::vector<std::vector<int>> members(graph.num_counties());
      std::vector<RaceCounts> county_totals(graph.num_counties(), RaceCounts{});
      for (std::size_t v = 0; v < n; ++v) {
        const auto c = static_cast<std::size_t>(graph.county_of(static_cast<int>(v)));
        members[c].push_back(static_cast<int>(v));
        for (std::size_t r = 0; r < kNumRaces; ++r) county_totals[c][r] += scenario.race[v][r];
      }
      for (std::size_t c = 0; c < members.size(); ++c) {
        Rng rng = Rng::substream(spec.seed, level_index, c);
        const auto top = plurality(county_totals[c]);
        for (std::size_t r = 0; r < kNumRaces; ++r) {
          const double a = spec.majority_race_protected && r == top ? alpha_protected : alpha;
          const std::int64_t eta = rng.two_sided_geometric(a);
          if (eta == 0) continue;
          std::vector<double> share(members[c].size());
          for (std::size_t i = 0; i < members[c].size(); ++i) {
            share[i] = static_cast<double>(scenario.race[static_cast<std::size_t>(members[c][i])][r]);
          }
          if (county_totals[c][r] == 0) std::fill(share.begin(), share.end(), 1.0);
          const auto parts = controlled_round(share, std::abs(eta));
          for (std::size_t i = 0; i < members[c].size(); ++i) {
            noisy[static_cast<std::size_t>(members[c][i])][r] += eta > 0 ? parts[i] : -parts[i];
          }
        }
      }
    } else {
      for (std::size_t v = 0; v < n; ++v) {
        Rng rng = Rng::substream(spec.seed, level_index, v);
        const auto top = plurality(scenario.race[v]);
        for (std::size_t r = 0; r < kNumRaces; ++r) {
          const double a = spec.majority_race_protected && r == top ? alpha_protected : alpha;
          noisy[v][r] += rng.two_sided_geometric(a);
        }
      }
    }
  }

  if (spec.nonnegative_counts) {
    for (auto& counts : noisy) {
      for (auto& c : counts) c = std::max<std::int64_t>(c, 0);
    }
  }

  if (spec.precinct_totals_exact) {
    for (std::size_t v = 0; v < n; ++v) {
      std::vector<double> cells(noisy[v].begin(), noisy[v].end());
      if (std::accumulate(cells.begin(), cells.end(), 0.0) <= 0.0) {
        noisy[v] = scenario.race[v];
        continue;
      }
      const auto rounded = controlled_round(cells, scenario.population[v]);
      std::copy(rounded.begin(), rounded.end(), noisy[v].begin());
    }
  } else if (spec.total_population_exact) {
    const auto original = scenario.total_population();
    std::int64_t current = 0;
    for (const auto& counts : noisy) current += total(counts);
    if (current != original) {
      std::vector<double> cells;
      cells.reserve(n * kNumRaces);
      const auto& source = current > 0 ? noisy : scenario.race;
      for (const auto& counts : source) {
        for (auto c : counts) cells.push_back(static_cast<double>(std::max<std::int64_t>(c, 0)));
      }
      const auto rounded = controlled_round(cells, original);
      for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t r = 0; r < kNumRaces; ++r) noisy[v][r] = rounded[v * kNumRaces + r];
      }
    }
  }

  PopulationScenario out;
  out.id = std::move(new_id);
  out.race = std::move(noisy);
  out.population.reserve(n);
  for (const auto& counts : out.race) out.population.push_back(total(counts));
  return out;
}

double mean_relative_error(const PopulationScenario& truth, const PopulationScenario& noisy) {
  if (truth.population.size() != noisy.population.size()) throw ValidationError("scenarios differ in size");
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t v = 0; v < truth.population.size(); ++v) {
    if (truth.population[v] <= 0) continue;
    acc += std::abs(static_cast<double>(noisy.population[v] - truth.population[v])) /
           static_cast<double>(truth.population[v]);
    ++n;
  }
  return n > 0 ? acc / static_cast<double>(n) : 0.0;
}

double mean_absolute_cell_error(const PopulationScenario& truth, const PopulationScenario& noisy) {
  if (truth.race.size() != noisy.race.size()) throw ValidationError("scenarios differ in size");
  double acc = 0.0;
  for (std::size_t v = 0; v < truth.race.size(); ++v) {
    for (std::size_t r = 0; r < kNumRaces; ++r) acc += std::abs(static_cast<double>(noisy.race[v][r] - truth.race[v][r]));
  }
  return truth.race.empty() ? 0.0 : acc / static_cast<double>(truth.race.size() * kNumRaces);
}

double calibrate_scale(const RegionGraph& graph, const PopulationScenario& scenario, const NoiseSpec& base,
                       double target, int replicates, std::uint64_t seed) {
  if (!(target > 0.0)) throw ValidationError("calibration target must be positive");
  if (replicates < 1) throw ValidationError("calibration needs at least one replicate");
  if (base.precinct_totals_exact) {
    throw ValidationError("cannot calibrate population error when precinct totals are kept exact");
  }
  auto error_at = [&](double scale) {
    NoiseSpec spec = base;
    spec.scale = scale;
    double acc = 0.0;
    for (int r = 0; r < replicates; ++r) {
      spec.seed = mix_seed(seed + static_cast<std::uint64_t>(r));
      acc += mean_relative_error(scenario, perturb_scenario(graph, scenario, spec, "calibration"));
    }
    return acc / replicates;
  };
  double lo = 1e-3;
  double hi = 1.0;
  while (error_at(hi) < target) {
    lo = hi;
    hi *= 4.0;
    if (hi > 1e9) throw ValidationError("noise calibration target is unreachable");
  }
  for (int iter = 0; iter < 40; ++iter) {
    const double mid = std::sqrt(lo * hi);
    (error_at(mid) < target ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

std::string_view covariate_name(Covariate c) {
  switch (c) {
    case Covariate::DemShare: return "dem_share";
    case Covariate::Turnout: return "turnout";
    case Covariate::MinorityShare: return "minority_share";
    case Covariate::Hhi: return "hhi";
  }
  return "unknown";
}

Covariate parse_covariate(std::string_view text) {
  for (auto c : {Covariate::DemShare, Covariate::Turnout, Covariate::MinorityShare, Covariate::Hhi}) {
    if (covariate_name(c) == text) return c;
  }
  throw ValidationError("unknown covariate '" + std::string(text) + "'");
}

std::vector<double> covariate_values(const RegionGraph& graph, const PopulationScenario& truth, Covariate c) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> values(graph.num_nodes(), nan);
  for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
    const auto& node = graph.node(static_cast<int>(v));
    const auto& race = truth.race[v];
    const auto pop = total(race);
    switch (c) {
      case Covariate::DemShare:
        if (node.votes_dem + node.votes_rep > 0) {
          values[v] = static_cast<double>(node.votes_dem) / static_cast<double>(node.votes_dem + node.votes_rep);
        }
        break;
      case Covariate::Turnout: values[v] = node.turnout; break;
      case Covariate::MinorityShare:
        if (pop > 0) values[v] = 1.0 - static_cast<double>(race[static_cast<std::size_t>(Race::White)]) / static_cast<double>(pop);
        break;
      case Covariate::Hhi:
        if (pop > 0) values[v] = metrics::hhi(race);
        break;
    }
  }
  return values;
}

std::vector<ErrorBin> error_summary(const RegionGraph& graph, const PopulationScenario& truth,
                                    const PopulationScenario& noisy, Covariate covariate, int n_bins) {
  if (n_bins < 2) throw ValidationError("error_summary needs at least 2 bins");
  truth.validate(graph);
  noisy.validate(graph);
  const auto x = covariate_values(graph, truth, covariate);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : x) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const auto bins_n = static_cast<std::size_t>(n_bins);
  std::vector<ErrorBin> bins(bins_n);
  if (!std::isfinite(lo)) {
    for (auto& b : bins) b.mean_error = b.sd_error = std::numeric_limits<double>::quiet_NaN();
    return bins;
  }
  const double width = (hi - lo) / static_cast<double>(n_bins);
  for (std::size_t b = 0; b < bins_n; ++b) {
    bins[b].low = lo + width * static_cast<double>(b);
    bins[b].high = b + 1 == bins_n ? hi : lo + width * static_cast<double>(b + 1);
  }

  std::vector<double> sum(bins_n, 0.0);
  std::vector<double> sum_sq(bins_n, 0.0);
  for (std::size_t v = 0; v < x.size(); ++v) {
    if (!std::isfinite(x[v])) continue;
    std::size_t b = width > 0.0 ? static_cast<std::size_t>(std::floor((x[v] - lo) / width)) : 0;
    b = std::min(b, bins_n - 1);
    const double err = static_cast<double>(noisy.population[v] - truth.population[v]);
    ++bins[b].count;
    sum[b] += err;
    sum_sq[b] += err * err;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t b = 0; b < bins_n; ++b) {
    auto& bin = bins[b];
    bin.defined = bin.count > 0;
    if (!bin.defined) {
      bin.mean_error = bin.sd_error = nan;
      continue;
    }
    const auto n = static_cast<double>(bin.count);
    bin.mean_error = sum[b] / n;
    bin.sd_error = bin.count > 1 ? std::sqrt(std::max(0.0, (sum_sq[b] - n * bin.mean_error * bin.mean_error) / (n - 1.0))) : nan;
  }
  return bins;
}

void write_error_summary_csv(std::ostream& out, std::span<const ErrorBin> bins) {
  auto num = [](double v) { return std::isfinite(v) ? csv::format_double(v) : std::string("NA"); };
  out << "bin_low,bin_high,count,mean_error,sd_error\n";
  for (const auto& b : bins) {
    out << num(b.low) << ',' << num(b.high) << ',' << b.count << ',' << num(b.mean_error) << ',' << num(b.sd_error)
        << '\n';
  }
}

}  // namespace redistrict::noise
