#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace redistrict {

enum class Race : std::uint8_t { White = 0, Black, Hispanic, Asian, Other };

inline constexpr std::size_t kNumRaces = 5;
inline constexpr std::array<Race, kNumRaces> kAllRaces = {
    Race::White, Race::Black, Race::Hispanic, Race::Asian, Race::Other};

/// Lowercase key used in region files and CSV headers ("white", "black", ...).
std::string_view race_key(Race race);
std::optional<Race> parse_race(std::string_view text);

using RaceCounts = std::array<std::int64_t, kNumRaces>;

inline std::int64_t total(const RaceCounts& counts) {
  std::int64_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

struct PrecinctAttributes {
  std::string id;
  std::string county;
  RaceCounts race{};
  std::int64_t votes_dem = 0;
  std::int64_t votes_rep = 0;
  double turnout = 0.0;

  friend bool operator==(const PrecinctAttributes&, const PrecinctAttributes&) = default;
};

/// Precinct adjacency graph. Nodes are addressed by dense index in file
/// order; ids are kept for I/O. Immutable once built.
class RegionGraph {
 public:
  /// Validates and builds. Throws ValidationError naming the offending id on
  /// duplicate nodes, unknown endpoints, self-loops, duplicate edges, bad
  /// attributes, or a disconnected graph.
  static RegionGraph build(std::vector<PrecinctAttributes> nodes,
                           const std::vector<std::pair<std::string, std::string>>& edges);

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const PrecinctAttributes& node(int v) const { return nodes_[static_cast<std::size_t>(v)]; }
  const std::vector<PrecinctAttributes>& nodes() const { return nodes_; }

  /// Edges as (u, v) index pairs with u < v, in file order.
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  std::span<const int> neighbors(int v) const {
    const auto b = offsets_[static_cast<std::size_t>(v)];
    const auto e = offsets_[static_cast<std::size_t>(v) + 1];
    return {adjacency_.data() + b, static_cast<std::size_t>(e - b)};
  }

  std::optional<int> index_of(std::string_view id) const;
  /// Like index_of but throws ValidationError for unknown ids.
  int require_index(std::string_view id) const;

  /// Dense county index per node, and the county label table.
  int county_of(int v) const { return county_index_[static_cast<std::size_t>(v)]; }
  std::size_t num_counties() const { return county_names_.size(); }
  const std::vector<std::string>& county_names() const { return county_names_; }

 private:
  RegionGraph() = default;

  std::vector<PrecinctAttributes> nodes_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<int> offsets_;
  std::vector<int> adjacency_;
  std::unordered_map<std::string, int> index_;
  std::vector<int> county_index_;
  std::vector<std::string> county_names_;
};

/// A named per-precinct population table, indexed by node index.
struct PopulationScenario {
  std::string id;
  std::vector<std::int64_t> population;
  std::vector<RaceCounts> race;

  std::int64_t total_population() const;

  /// Throws ValidationError unless the scenario covers `graph` and each
  /// precinct's race counts sum to its population.
  void validate(const RegionGraph& graph) const;

  friend bool operator==(const PopulationScenario&, const PopulationScenario&) = default;
};

/// Builds a scenario whose counts are the race counts stored on the nodes.
PopulationScenario scenario_from_nodes(const RegionGraph& graph, std::string id);

/// Precinct-to-district assignment. Districts are labelled 1..n_districts.
struct Plan {
  int n_districts = 0;
  std::vector<int> district;

  friend bool operator==(const Plan&, const Plan&) = default;
};

/// Throws ValidationError unless `plan` covers `graph`, labels lie in
/// 1..n_districts and every district is nonempty.
void validate_plan_labels(const RegionGraph& graph, const Plan& plan);

/// Per-district connectivity of the induced subgraph; index k-1 is district k.
std::vector<bool> contiguity_check(const RegionGraph& graph, const Plan& plan);

bool is_contiguous(const RegionGraph& graph, const Plan& plan);

struct Provenance {
  std::string scenario_id;
  double tolerance = 0.0;
  std::string sampler;
  nlohmann::ordered_json constraints = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
  /// Sampler-specific details (chain length, burn-in, ESS, ...).
  nlohmann::ordered_json diagnostics = nlohmann::ordered_json::object();
};

struct PlanEnsemble {
  std::vector<Plan> plans;
  std::vector<double> weights;
  Provenance provenance;

  std::size_t size() const { return plans.size(); }
};

/// Graph plus all scenarios carried by a region file.
struct RegionData {
  RegionGraph graph;
  std::vector<PopulationScenario> scenarios;

  const PopulationScenario& scenario(std::string_view id) const;
};

RegionData parse_region(const nlohmann::json& doc);
RegionData load_region_graph(const std::filesystem::path& path);

nlohmann::ordered_json region_to_json(const RegionGraph& graph,
                                      std::span<const PopulationScenario> scenarios);
void save_region(const std::filesystem::path& path, const RegionGraph& graph,
                 std::span<const PopulationScenario> scenarios);

/// Plan CSV with header `precinct_id,district`.
Plan read_plan_csv(const std::filesystem::path& path, const RegionGraph& graph);
void write_plan_csv(const std::filesystem::path& path, const RegionGraph& graph, const Plan& plan);

}  // namespace redistrict
