#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "redistrict/graph.hpp"

namespace redistrict::metrics {

/// Which races count toward a majority-minority district, and the share of
/// district population they must strictly exceed.
struct MmdDefinition {
  std::uint8_t race_mask = 0;
  double threshold = 0.5;

  static MmdDefinition of(std::initializer_list<Race> races, double threshold = 0.5);
  /// {Black}: the Black-population definition used for the precinct-probability analyses.
  static MmdDefinition black() { return of({Race::Black}); }
  /// {Black, Hispanic}: the registered-voter definition used for the confusion analysis.
  static MmdDefinition black_hispanic() { return of({Race::Black, Race::Hispanic}); }

  bool includes(Race r) const { return (race_mask >> static_cast<unsigned>(r)) & 1U; }
  std::string name() const;

  friend bool operator==(const MmdDefinition&, const MmdDefinition&) = default;
};

struct ParityResult {
  std::vector<double> deviation;  // index k-1 is district k
  double max_deviation = 0.0;
};

std::vector<std::int64_t> district_populations(const Plan& plan, const PopulationScenario& scenario);

/// Per-district |P_k - P̄| / P̄ with P̄ = total / n_districts, and the maximum.
/// Throws ValidationError on zero total population or a plan/scenario size mismatch.
ParityResult parity_deviation(const Plan& plan, const PopulationScenario& scenario);

struct Reevaluation {
  std::vector<double> max_deviation;  // per plan
  double invalid_fraction = 0.0;      // weighted share with max_deviation > tolerance
};

Reevaluation reevaluate_ensemble(const PlanEnsemble& ensemble, const PopulationScenario& scenario, double tolerance);

/// Counties whose precincts touch more than one district.
int county_splits(const Plan& plan, const RegionGraph& graph);

int cut_edge_count(const Plan& plan, const RegionGraph& graph);

/// Share of graph edges whose endpoints lie in different districts.
double compactness_cut_edges(const Plan& plan, const RegionGraph& graph);

/// Districts where the Democratic two-party share is strictly above 1/2.
/// Throws ValidationError if a district has no two-party votes.
int dem_majority_seats(const Plan& plan, const RegionGraph& graph);

/// Per-district MMD indicator (index k-1 is district k).
std::vector<bool> mmd_districts(const Plan& plan, const PopulationScenario& scenario, const MmdDefinition& def);
int mmd_count(const Plan& plan, const PopulationScenario& scenario, const MmdDefinition& def);

/// Herfindahl-Hirschman index of racial composition, in percent.
/// Throws ValidationError for an empty precinct.
double hhi(const RaceCounts& counts);

/// Weighted probability that each precinct lies in an MMD.
std::vector<double> mmd_membership_prob(const PlanEnsemble& ensemble, const PopulationScenario& scenario,
                                        const MmdDefinition& def);

/// Elementwise a - b. Throws ValidationError on a length mismatch.
std::vector<double> prob_difference(std::span<const double> a, std::span<const double> b);

/// Normalized weighted histogram of an integer plan metric.
std::map<int, double> seats_histogram(const PlanEnsemble& ensemble, const std::function<int(const Plan&)>& metric);

/// Joint MMD-count table: cell (i, j) is the percentage of the weight of
/// plans with i MMDs under A that have j MMDs under B. Rows without plans are
/// left at zero.
struct ConfusionTable {
  int size = 0;                     // counts range over 0..size-1
  std::vector<double> percent;      // row-major size x size
  std::vector<double> row_weight;   // total ensemble weight per row
  std::vector<std::size_t> row_plans;

  double at(int i, int j) const { return percent[static_cast<std::size_t>(i * size + j)]; }
};

ConfusionTable mmd_confusion(const PlanEnsemble& ensemble, const PopulationScenario& a, const PopulationScenario& b,
                             const MmdDefinition& def);

/// Kish effective sample size (sum w)^2 / sum w^2.
double effective_sample_size(std::span<const double> weights);

/// Effective sample size of an autocorrelated series (Geyer's initial
/// positive sequence estimator).
double autocorrelation_ess(std::span<const double> series);

}  // namespace redistrict::metrics
