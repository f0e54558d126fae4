#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "redistrict/bisg.hpp"
#include "redistrict/graph.hpp"
#include "redistrict/metrics.hpp"
#include "redistrict/noise.hpp"
#include "redistrict/report.hpp"

namespace redistrict::experiments {

/// How perturbed scenarios are added on top of the ones in the region file.
struct NoiseSetup {
  /// Scenario the noise is applied to; empty means the first one in the file.
  std::string base_scenario;
  /// One perturbed scenario per scale, ids "noisy-s<scale>".
  std::vector<double> scales;
  /// If set, add scenario "noisy-cal" whose scale is calibrated to this mean
  /// relative precinct population error.
  std::optional<double> calibrate_error;
  bool majority_race_protected = false;
  /// Keep every precinct's total; noise only reshuffles race composition.
  bool preserve_precinct_totals = false;
  /// If set, precinct-level noise only touches precincts whose HHI (percent)
  /// is below this value; county-level noise is then disabled.
  std::optional<double> mixed_hhi_ceiling;
};

/// Region scenarios followed by the perturbed ones described by `setup`.
/// Noise metadata (scale, realized mean relative error) is written to `meta`.
std::vector<PopulationScenario> prepare_scenarios(const RegionData& region, const NoiseSetup& setup,
                                                  std::uint64_t seed, nlohmann::ordered_json* meta = nullptr);

/// Noise restricted to precincts with HHI below `hhi_ceiling`; other
/// precincts keep their counts. Grand total is restored by controlled rounding.
PopulationScenario perturb_mixed_precincts(const RegionGraph& graph, const PopulationScenario& scenario,
                                           const noise::NoiseSpec& spec, double hhi_ceiling, std::string new_id);

struct ParityConfig {
  int n_districts = 5;
  std::size_t n_plans = 1000;
  std::vector<double> tolerances = {0.001, 0.01, 0.05};
  NoiseSetup noise;
  std::optional<int> max_county_splits;
  /// Emit one max-deviation row per plan (plot-ready distributions).
  bool per_plan_rows = true;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

/// For every (generating scenario, tolerance): sample an SMC ensemble,
/// re-measure parity under every scenario and report invalid fractions.
/// summary["invalid_fraction"][generating][tolerance][evaluated].
MetricReport run_parity_experiment(const RegionData& region, const ParityConfig& config);

struct PartisanConfig {
  int n_districts = 5;
  std::size_t n_plans = 1000;
  double tolerance = 0.01;
  NoiseSetup noise;
  std::optional<Plan> enacted;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

/// Democratic-majority seat histograms per generating scenario.
/// summary["histograms"][scenario][seats] = mass; summary["enacted_seats"].
MetricReport run_partisan_experiment(const RegionData& region, const PartisanConfig& config);

struct MmdConfig {
  int n_districts = 4;
  double tolerance = 0.05;
  std::size_t n_steps = 10000;
  std::size_t thin = 1;
  std::vector<double> vra_weights = {0.0, 1.0, 4.0};
  int vra_target_mmds = 2;
  double compactness_weight = 0.0;
  metrics::MmdDefinition mmd = metrics::MmdDefinition::black();
  NoiseSetup noise;
  std::uint64_t seed = 1;
};

/// Merge-split chains per scenario and VRA weight. The first scenario is the
/// reference; every other scenario is compared to it. Chains share a seed
/// across scenarios so differences come from the data, not the stream.
/// summary["max_abs_difference"][weight][scenario], confusion tables
/// "confusion_w<weight>_<scenario>" (rows: reference, columns: scenario,
/// plans drawn under the scenario).
MetricReport run_mmd_experiment(const RegionData& region, const MmdConfig& config);

struct BisgConfig {
  NoiseSetup noise;
  int n_districts = 4;
  std::size_t n_plans = 500;
  double tolerance = 0.05;
  metrics::MmdDefinition mmd = metrics::MmdDefinition::black_hispanic();
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

/// Scores voters with each scenario's geographic prior; reports per-race
/// AUROC and misclassification, then MMD confusion between the voter-race
/// compositions imputed under the first and last scenarios, over plans drawn
/// from the last scenario. Requires true_race on every voter.
MetricReport run_bisg_experiment(const RegionData& region, std::span<const bisg::VoterRecord> voters,
                                 const bisg::NameTables& tables, const BisgConfig& config);

/// Per-precinct registered-voter counts by imputed race: the posterior mass
/// of each precinct's voters, rounded to the voter count.
PopulationScenario imputed_voter_scenario(const RegionGraph& graph, std::span<const bisg::VoterRecord> voters,
                                          std::span<const bisg::RaceVector> posteriors, std::string id);

ReportTable confusion_report_table(const metrics::ConfusionTable& table, std::string name,
                                   const std::string& row_scenario, const std::string& col_scenario);

}  // namespace redistrict::experiments
