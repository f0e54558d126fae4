#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "redistrict/graph.hpp"

namespace redistrict {

nlohmann::ordered_json provenance_to_json(const Provenance& provenance);
Provenance provenance_from_json(const nlohmann::json& doc);

/// Long CSV `plan_index,weight,precinct_id,district`.
void write_ensemble_csv(const std::filesystem::path& path, const RegionGraph& graph, const PlanEnsemble& ensemble);

/// Reads an ensemble CSV. Plan indices must be contiguous from 0 and each
/// plan must cover every precinct. Weights are renormalized to sum to 1.
PlanEnsemble read_ensemble_csv(const std::filesystem::path& path, const RegionGraph& graph);

/// Writes `<csv_path>` plus the JSON provenance sidecar `<csv_path>.json`.
void write_ensemble(const std::filesystem::path& csv_path, const RegionGraph& graph, const PlanEnsemble& ensemble);

}  // namespace redistrict
