#include "redistrict/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include "redistrict/csv.hpp"
#include "redistrict/error.hpp"

namespace redistrict {

using json = nlohmann::json;

std::string_view race_key(Race race) {
  switch (race) {
    case Race::White: return "white";
    case Race::Black: return "black";
    case Race::Hispanic: return "hispanic";
    case Race::Asian: return "asian";
    case Race::Other: return "other";
  }
  return "other";
}

std::optional<Race> parse_race(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (auto r : kAllRaces) {
    if (race_key(r) == lower) return r;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// RegionGraph

RegionGraph RegionGraph::build(std::vector<PrecinctAttributes> nodes,
                               const std::vector<std::pair<std::string, std::string>>& edges) {
  RegionGraph g;
  if (nodes.empty()) throw ValidationError("region graph has no nodes");

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.id.empty()) throw ValidationError("node at position " + std::to_string(i) + " has an empty id");
    if (!g.index_.emplace(n.id, static_cast<int>(i)).second) {
      throw ValidationError("duplicate node id '" + n.id + "'");
    }
    for (auto c : n.race) {
      if (c < 0) throw ValidationError("node '" + n.id + "' has a negative race count");
    }
    if (n.votes_dem < 0 || n.votes_rep < 0) {
      throw ValidationError("node '" + n.id + "' has negative votes");
    }
    if (!(n.turnout >= 0.0 && n.turnout <= 1.0)) {
      throw ValidationError("node '" + n.id + "' has turnout outside [0,1]");
    }
  }

  std::set<std::pair<int, int>> seen;
  for (const auto& [a, b] : edges) {
    const auto ia = g.index_.find(a);
    if (ia == g.index_.end()) throw ValidationError("edge references unknown node '" + a + "'");
    const auto ib = g.index_.find(b);
    if (ib == g.index_.end()) throw ValidationError("edge references unknown node '" + b + "'");
    if (ia->second == ib->second) throw ValidationError("self-loop on node '" + a + "'");
    const auto key = std::minmax(ia->second, ib->second);
    if (!seen.insert(key).second) {
      throw ValidationError("duplicate edge ('" + a + "', '" + b + "')");
    }
    g.edges_.emplace_back(key.first, key.second);
  }

  const std::size_t n = nodes.size();
  std::vector<int> degree(n, 0);
  for (const auto& [u, v] : g.edges_) {
    ++degree[static_cast<std::size_t>(u)];
    ++degree[static_cast<std::size_t>(v)];
  }
  g.offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + degree[i];
  g.adjacency_.assign(static_cast<std::size_t>(g.offsets_[n]), 0);
  std::vector<int> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& [u, v] : g.edges_) {
    g.adjacency_[static_cast<std::size_t>(fill[static_cast<std::size_t>(u)]++)] = v;
    g.adjacency_[static_cast<std::size_t>(fill[static_cast<std::size_t>(v)]++)] = u;
  }

  // Connectivity.
  std::vector<char> visited(n, 0);
  std::queue<int> frontier;
  frontier.push(0);
  visited[0] = 1;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int w : g.neighbors(u)) {
      if (!visited[static_cast<std::size_t>(w)]) {
        visited[static_cast<std::size_t>(w)] = 1;
        ++reached;
        frontier.push(w);
      }
    }
  }
  if (reached != n) {
    const auto missing = std::find(visited.begin(), visited.end(), 0) - visited.begin();
    throw ValidationError("region graph is disconnected: node '" +
                          nodes[static_cast<std::size_t>(missing)].id + "' is unreachable from '" +
                          nodes[0].id + "'");
  }

  std::unordered_map<std::string, int> county_ids;
  g.county_index_.reserve(n);
  for (const auto& node : nodes) {
    auto [it, inserted] = county_ids.emplace(node.county, static_cast<int>(g.county_names_.size()));
    if (inserted) g.county_names_.push_back(node.county);
    g.county_index_.push_back(it->second);
  }

  g.nodes_ = std::move(nodes);
  return g;
}

std::optional<int> RegionGraph::index_of(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int RegionGraph::require_index(std::string_view id) const {
  if (auto idx = index_of(id)) return *idx;
  throw ValidationError("unknown precinct id '" + std::string(id) + "'");
}

// ---------------------------------------------------------------------------
// Scenarios

std::int64_t PopulationScenario::total_population() const {
  std::int64_t sum = 0;
  for (auto p : population) sum += p;
  return sum;
}

void PopulationScenario::validate(const RegionGraph& graph) const {
  if (population.size() != graph.num_nodes() || race.size() != graph.num_nodes()) {
    throw ValidationError("scenario '" + id + "' does not cover every precinct");
  }
  for (std::size_t v = 0; v < population.size(); ++v) {
    const auto& pid = graph.node(static_cast<int>(v)).id;
    if (population[v] < 0) {
      throw ValidationError("scenario '" + id + "': negative population at precinct '" + pid + "'");
    }
    for (auto c : race[v]) {
      if (c < 0) {
        throw ValidationError("scenario '" + id + "': negative race count at precinct '" + pid + "'");
      }
    }
    if (total(race[v]) != population[v]) {
      std::ostringstream msg;
      msg << "scenario '" << id << "': race counts at precinct '" << pid << "' sum to "
          << total(race[v]) << " but population is " << population[v];
      throw ValidationError(msg.str());
    }
  }
}

PopulationScenario scenario_from_nodes(const RegionGraph& graph, std::string id) {
  PopulationScenario s;
  s.id = std::move(id);
  s.population.reserve(graph.num_nodes());
  s.race.reserve(graph.num_nodes());
  for (const auto& n : graph.nodes()) {
    s.race.push_back(n.race);
    s.population.push_back(total(n.race));
  }
  return s;
}

const PopulationScenario& RegionData::scenario(std::string_view id) const {
  for (const auto& s : scenarios) {
    if (s.id == id) return s;
  }
  throw ValidationError("unknown scenario '" + std::string(id) + "'");
}

// ---------------------------------------------------------------------------
// Plans

void validate_plan_labels(const RegionGraph& graph, const Plan& plan) {
  if (plan.n_districts < 1) throw ValidationError("plan has no districts");
  if (plan.district.size() != graph.num_nodes()) {
    throw ValidationError("plan covers " + std::to_string(plan.district.size()) + " precincts, graph has " +
                          std::to_string(graph.num_nodes()));
  }
  std::vector<int> sizes(static_cast<std::size_t>(plan.n_districts), 0);
  for (std::size_t v = 0; v < plan.district.size(); ++v) {
    const int d = plan.district[v];
    if (d < 1 || d > plan.n_districts) {
      throw ValidationError("precinct '" + graph.node(static_cast<int>(v)).id + "' has district " +
                            std::to_string(d) + " outside 1.." + std::to_string(plan.n_districts));
    }
    ++sizes[static_cast<std::size_t>(d - 1)];
  }
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] == 0) throw ValidationError("district " + std::to_string(k + 1) + " is empty");
  }
}

std::vector<bool> contiguity_check(const RegionGraph& graph, const Plan& plan) {
  if (plan.district.size() != graph.num_nodes()) {
    throw ValidationError("plan does not cover the graph");
  }
  const auto nd = static_cast<std::size_t>(plan.n_districts);
  std::vector<int> size(nd, 0);
  std::vector<int> seed(nd, -1);
  for (std::size_t v = 0; v < plan.district.size(); ++v) {
    const int d = plan.district[v];
    if (d < 1 || d > plan.n_districts) throw ValidationError("plan has an out-of-range district label");
    ++size[static_cast<std::size_t>(d - 1)];
    if (seed[static_cast<std::size_t>(d - 1)] < 0) seed[static_cast<std::size_t>(d - 1)] = static_cast<int>(v);
  }

  std::vector<bool> result(nd, false);
  std::vector<char> visited(graph.num_nodes(), 0);
  std::vector<int> stack;
  for (std::size_t k = 0; k < nd; ++k) {
    if (seed[k] < 0) continue;  // empty district is not connected
    const int label = static_cast<int>(k) + 1;
    int reached = 0;
    stack.assign(1, seed[k]);
    visited[static_cast<std::size_t>(seed[k])] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      ++reached;
      for (int w : graph.neighbors(u)) {
        const auto wi = static_cast<std::size_t>(w);
        if (!visited[wi] && plan.district[wi] == label) {
          visited[wi] = 1;
          stack.push_back(w);
        }
      }
    }
    result[k] = reached == size[k];
  }
  return result;
}

bool is_contiguous(const RegionGraph& graph, const Plan& plan) {
  const auto parts = contiguity_check(graph, plan);
  return std::all_of(parts.begin(), parts.end(), [](bool b) { return b; });
}

// ---------------------------------------------------------------------------
// Region file I/O

namespace {

std::int64_t require_count(const json& value, std::string_view what, std::string_view owner) {
  if (value.is_number_integer()) {
    const auto n = value.get<std::int64_t>();
    if (n < 0) {
      throw ValidationError(std::string(what) + " for '" + std::string(owner) + "' is negative");
    }
    return n;
  }
  if (value.is_number_float()) {
    throw ValidationError(std::string(what) + " for '" + std::string(owner) +
                          "' is fractional; counts must be integers");
  }
  throw ValidationError(std::string(what) + " for '" + std::string(owner) + "' is not a number");
}

RaceCounts parse_race_object(const json& obj, std::string_view owner) {
  if (!obj.is_object()) throw ValidationError("race counts for '" + std::string(owner) + "' must be an object");
  RaceCounts counts{};
  for (const auto& [key, value] : obj.items()) {
    const auto race = parse_race(key);
    if (!race) throw ValidationError("unknown race category '" + key + "' for '" + std::string(owner) + "'");
    counts[static_cast<std::size_t>(*race)] = require_count(value, "race count", owner);
  }
  return counts;
}

std::string require_string(const json& obj, const char* key, std::string_view owner) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ValidationError("missing string field '" + std::string(key) + "' in " + std::string(owner));
  }
  return it->get<std::string>();
}

}  // namespace

RegionData parse_region(const json& doc) {
  if (!doc.is_object()) throw ValidationError("region file must be a JSON object");
  const auto nodes_it = doc.find("nodes");
  if (nodes_it == doc.end() || !nodes_it->is_array()) throw ValidationError("region file needs a 'nodes' array");

  std::vector<PrecinctAttributes> nodes;
  nodes.reserve(nodes_it->size());
  for (const auto& jn : *nodes_it) {
    if (!jn.is_object()) throw ValidationError("node entries must be objects");
    PrecinctAttributes p;
    p.id = require_string(jn, "id", "node");
    p.county = jn.contains("county") ? require_string(jn, "county", "node '" + p.id + "'") : std::string();
    if (jn.contains("race")) p.race = parse_race_object(jn.at("race"), p.id);
    if (jn.contains("votes_dem")) p.votes_dem = require_count(jn.at("votes_dem"), "votes_dem", p.id);
    if (jn.contains("votes_rep")) p.votes_rep = require_count(jn.at("votes_rep"), "votes_rep", p.id);
    if (jn.contains("turnout")) {
      if (!jn.at("turnout").is_number()) throw ValidationError("turnout for '" + p.id + "' is not a number");
      p.turnout = jn.at("turnout").get<double>();
    }
    nodes.push_back(std::move(p));
  }

  std::vector<std::pair<std::string, std::string>> edges;
  if (const auto edges_it = doc.find("edges"); edges_it != doc.end()) {
    if (!edges_it->is_array()) throw ValidationError("'edges' must be an array");
    for (const auto& je : *edges_it) {
      if (!je.is_array() || je.size() != 2 || !je[0].is_string() || !je[1].is_string()) {
        throw ValidationError("each edge must be a pair of node id strings");
      }
      edges.emplace_back(je[0].get<std::string>(), je[1].get<std::string>());
    }
  }

  RegionData data{RegionGraph::build(std::move(nodes), edges), {}};
  const auto& graph = data.graph;

  if (const auto sc_it = doc.find("scenarios"); sc_it != doc.end()) {
    if (!sc_it->is_array()) throw ValidationError("'scenarios' must be an array");
    std::set<std::string> ids;
    for (const auto& js : *sc_it) {
      PopulationScenario s;
      s.id = require_string(js, "id", "scenario");
      if (!ids.insert(s.id).second) throw ValidationError("duplicate scenario id '" + s.id + "'");
      s.population.assign(graph.num_nodes(), -1);
      s.race.assign(graph.num_nodes(), RaceCounts{});
      std::vector<char> has_race(graph.num_nodes(), 0);

      const auto pop_it = js.find("population");
      if (pop_it == js.end() || !pop_it->is_object()) {
        throw ValidationError("scenario '" + s.id + "' needs a 'population' object");
      }
      for (const auto& [pid, value] : pop_it->items()) {
        const auto v = graph.index_of(pid);
        if (!v) throw ValidationError("scenario '" + s.id + "' references unknown precinct '" + pid + "'");
        s.population[static_cast<std::size_t>(*v)] = require_count(value, "population", pid);
      }
      const auto race_it = js.find("race");
      if (race_it == js.end() || !race_it->is_object()) {
        throw ValidationError("scenario '" + s.id + "' needs a 'race' object");
      }
      for (const auto& [pid, value] : race_it->items()) {
        const auto v = graph.index_of(pid);
        if (!v) throw ValidationError("scenario '" + s.id + "' references unknown precinct '" + pid + "'");
        s.race[static_cast<std::size_t>(*v)] = parse_race_object(value, pid);
        has_race[static_cast<std::size_t>(*v)] = 1;
      }
      for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
        if (s.population[v] < 0 || !has_race[v]) {
          throw ValidationError("scenario '" + s.id + "' does not cover precinct '" +
                                graph.node(static_cast<int>(v)).id + "'");
        }
      }
      s.validate(graph);
      data.scenarios.push_back(std::move(s));
    }
  }
  if (data.scenarios.empty()) data.scenarios.push_back(scenario_from_nodes(graph, "census"));
  return data;
}

RegionData load_region_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open region file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("cannot parse " + path.string() + ": " + e.what());
  }
  return parse_region(doc);
}

namespace {

nlohmann::ordered_json race_to_json(const RaceCounts& counts) {
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  for (auto r : kAllRaces) obj[std::string(race_key(r))] = counts[static_cast<std::size_t>(r)];
  return obj;
}

}  // namespace

nlohmann::ordered_json region_to_json(const RegionGraph& graph, std::span<const PopulationScenario> scenarios) {
  nlohmann::ordered_json doc;
  auto& nodes = doc["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : graph.nodes()) {
    nlohmann::ordered_json jn;
    jn["id"] = n.id;
    jn["county"] = n.county;
    jn["race"] = race_to_json(n.race);
    jn["votes_dem"] = n.votes_dem;
    jn["votes_rep"] = n.votes_rep;
    jn["turnout"] = n.turnout;
    nodes.push_back(std::move(jn));
  }
  auto& edges = doc["edges"] = nlohmann::ordered_json::array();
  for (const auto& [u, v] : graph.edges()) {
    edges.push_back({graph.node(u).id, graph.node(v).id});
  }
  auto& scs = doc["scenarios"] = nlohmann::ordered_json::array();
  for (const auto& s : scenarios) {
    nlohmann::ordered_json js;
    js["id"] = s.id;
    auto pop = nlohmann::ordered_json::object();
    auto race = nlohmann::ordered_json::object();
    for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
      const auto& pid = graph.node(static_cast<int>(v)).id;
      pop[pid] = s.population[v];
      race[pid] = race_to_json(s.race[v]);
    }
    js["population"] = std::move(pop);
    js["race"] = std::move(race);
    scs.push_back(std::move(js));
  }
  return doc;
}

void save_region(const std::filesystem::path& path, const RegionGraph& graph,
                 std::span<const PopulationScenario> scenarios) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << region_to_json(graph, scenarios).dump(1) << '\n';
}

Plan read_plan_csv(const std::filesystem::path& path, const RegionGraph& graph) {
  const auto table = csv::read_file(path);
  const int c_id = table.require_column("precinct_id");
  const int c_d = table.require_column("district");
  Plan plan;
  plan.district.assign(graph.num_nodes(), 0);
  for (const auto& row : table.rows) {
    const int v = graph.require_index(row[static_cast<std::size_t>(c_id)]);
    const auto d = csv::parse_int(row[static_cast<std::size_t>(c_d)], "district");
    if (plan.district[static_cast<std::size_t>(v)] != 0) {
      throw ValidationError("plan assigns precinct '" + row[static_cast<std::size_t>(c_id)] + "' twice");
    }
    plan.district[static_cast<std::size_t>(v)] = static_cast<int>(d);
    plan.n_districts = std::max(plan.n_districts, static_cast<int>(d));
  }
  for (std::size_t v = 0; v < plan.district.size(); ++v) {
    if (plan.district[v] == 0) {
      throw ValidationError("plan does not assign precinct '" + graph.node(static_cast<int>(v)).id + "'");
    }
  }
  validate_plan_labels(graph, plan);
  return plan;
}

void write_plan_csv(const std::filesystem::path& path, const RegionGraph& graph, const Plan& plan) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "precinct_id,district\n";
  for (std::size_t v = 0; v < plan.district.size(); ++v) {
    out << graph.node(static_cast<int>(v)).id << ',' << plan.district[v] << '\n';
  }
}

}  // namespace redistrict
