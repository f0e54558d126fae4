#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "redistrict/graph.hpp"

namespace redistrict::noise {

enum class Level { County, Precinct };

/// Hierarchical noise settings. `scale` plays the role of 1/epsilon: each
/// noisy cell receives two-sided geometric noise with P(k) proportional to
/// exp(-|k| / scale).
struct NoiseSpec {
  double scale = 1.0;
  std::vector<Level> levels = {Level::County, Level::Precinct};
  bool total_population_exact = true;
  /// Restore every precinct's own total, so only race composition changes.
  /// Implies total_population_exact.
  bool precinct_totals_exact = false;
  bool nonnegative_counts = true;
  /// Halve the noise scale on each unit's plurality race.
  bool majority_race_protected = false;
  std::uint64_t seed = 0;
};

/// exp(-1/scale); 0 for scale <= 0 (no noise).
double geometric_alpha(double scale);

/// Integer allocation of `values` summing to `target_total`: floors plus one
/// unit to each of the largest fractional remainders (ties to lower index).
/// Values must be nonnegative and their sum positive unless target_total is 0.
std::vector<std::int64_t> controlled_round(std::span<const double> values, std::int64_t target_total);

/// Noise-perturbed copy of `scenario` with id `new_id`:
///  1. county level: noise on each county's per-race totals, spread over the
///     county's precincts in proportion to their counts of that race;
///  2. precinct level: independent noise on each precinct's per-race counts;
///  3. clip to nonnegative, rescale with controlled rounding so the grand
///     total (or, with precinct_totals_exact, each precinct's total) equals
///     the original, and recompute precinct populations.
PopulationScenario perturb_scenario(const RegionGraph& graph, const PopulationScenario& scenario,
                                    const NoiseSpec& spec, std::string new_id);

/// Mean over populated precincts of |noisy - true| / true.
double mean_relative_error(const PopulationScenario& truth, const PopulationScenario& noisy);

/// Mean absolute per-cell (precinct x race) error.
double mean_absolute_cell_error(const PopulationScenario& truth, const PopulationScenario& noisy);

/// Noise scale whose expected mean_relative_error is `target` (bisection on
/// Monte Carlo estimates with common random numbers; deterministic in seed).
double calibrate_scale(const RegionGraph& graph, const PopulationScenario& scenario, const NoiseSpec& base,
                       double target, int replicates = 20, std::uint64_t seed = 0);

enum class Covariate { DemShare, Turnout, MinorityShare, Hhi };

std::string_view covariate_name(Covariate c);
Covariate parse_covariate(std::string_view text);

/// Covariate value per precinct, computed from graph attributes and the true scenario.
std::vector<double> covariate_values(const RegionGraph& graph, const PopulationScenario& truth, Covariate c);

struct ErrorBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;
  double mean_error = 0.0;  // noisy - true population; NaN when empty
  double sd_error = 0.0;    // sample sd; NaN when count < 2
  bool defined = false;     // false for empty bins
};

/// Equal-width bins over the covariate's observed range (last bin closed).
/// Precincts whose covariate is undefined (e.g. no votes) are skipped.
std::vector<ErrorBin> error_summary(const RegionGraph& graph, const PopulationScenario& truth,
                                    const PopulationScenario& noisy, Covariate covariate, int n_bins);

/// CSV `bin_low,bin_high,count,mean_error,sd_error`; undefined values print as NA.
void write_error_summary_csv(std::ostream& out, std::span<const ErrorBin> bins);

}  // namespace redistrict::noise
