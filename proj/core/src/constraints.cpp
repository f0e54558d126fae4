#include "redistrict/constraints.hpp"

#include <algorithm>
#include <cmath>

#include "redistrict/error.hpp"

namespace redistrict {

void ConstraintConfig::validate() const {
  if (!(pop_tolerance >= 0.0) || !std::isfinite(pop_tolerance)) {
    throw ValidationError("pop_tolerance must be a finite nonnegative fraction");
  }
  if (max_county_splits && *max_county_splits < 0) throw ValidationError("max_county_splits must be >= 0");
  if (!(compactness_weight >= 0.0) || !std::isfinite(compactness_weight)) {
    throw ValidationError("compactness_weight must be finite and >= 0");
  }
  if (!(vra_weight >= 0.0) || !std::isfinite(vra_weight)) throw ValidationError("vra_weight must be finite and >= 0");
  if (vra_target_mmds && *vra_target_mmds < 0) throw ValidationError("vra_target_mmds must be >= 0");
  if (retry_budget < 1) throw ValidationError("retry_budget must be >= 1");
}

double ConstraintConfig::energy(const Plan& plan, const RegionGraph& graph, const PopulationScenario& scenario) const {
  double e = 0.0;
  if (compactness_weight > 0.0) e += compactness_weight * metrics::cut_edge_count(plan, graph);
  if (vra_weight > 0.0 && vra_target_mmds) {
    const int shortfall = std::max(0, *vra_target_mmds - metrics::mmd_count(plan, scenario, mmd));
    e += vra_weight * shortfall;
  }
  return e;
}

nlohmann::ordered_json ConstraintConfig::to_json() const {
  nlohmann::ordered_json j;
  j["pop_tolerance"] = pop_tolerance;
  j["max_county_splits"] = max_county_splits ? nlohmann::ordered_json(*max_county_splits) : nlohmann::ordered_json();
  j["compactness_weight"] = compactness_weight;
  j["vra_weight"] = vra_weight;
  j["vra_target_mmds"] = vra_target_mmds ? nlohmann::ordered_json(*vra_target_mmds) : nlohmann::ordered_json();
  j["mmd_definition"] = mmd.name();
  j["mmd_threshold"] = mmd.threshold;
  j["retry_budget"] = retry_budget;
  return j;
}

}  // namespace redistrict
