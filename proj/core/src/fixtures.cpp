#include "redistrict/fixtures.hpp"

#include <algorithm>
#include <cmath>

#include "redistrict/error.hpp"
#include "redistrict/noise.hpp"
#include "redistrict/random.hpp"

namespace redistrict::fixtures {

namespace {

std::string cell_id(int r, int c) { return "r" + std::to_string(r) + "c" + std::to_string(c); }

std::vector<std::pair<std::string, std::string>> grid_edges(int rows, int cols) {
  std::vector<std::pair<std::string, std::string>> edges;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(cell_id(r, c), cell_id(r, c + 1));
      if (r + 1 < rows) edges.emplace_back(cell_id(r, c), cell_id(r + 1, c));
    }
  }
  return edges;
}

double uniform_between(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

}  // namespace

RegionGraph grid_graph(int rows, int cols) {
  if (rows < 1 || cols < 1) throw ValidationError("grid dimensions must be positive");
  std::vector<PrecinctAttributes> nodes;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      PrecinctAttributes p;
      p.id = cell_id(r, c);
      p.county = "c0";
      p.race[static_cast<std::size_t>(Race::White)] = 1;
      p.votes_dem = 1;
      p.votes_rep = 1;
      p.turnout = 0.5;
      nodes.push_back(std::move(p));
    }
  }
  return RegionGraph::build(std::move(nodes), grid_edges(rows, cols));
}

RegionData unit_grid(int rows, int cols, std::int64_t population) {
  auto graph = grid_graph(rows, cols);
  std::vector<PrecinctAttributes> nodes = graph.nodes();
  for (auto& n : nodes) n.race = RaceCounts{population, 0, 0, 0, 0};
  RegionData data{RegionGraph::build(std::move(nodes), grid_edges(rows, cols)), {}};
  data.scenarios.push_back(scenario_from_nodes(data.graph, "census"));
  return data;
}

std::string_view layout_name(Layout layout) {
  switch (layout) {
    case Layout::Uniform: return "uniform";
    case Layout::SegregatedCity: return "segregated";
    case Layout::Checkerboard: return "checkerboard";
  }
  return "uniform";
}

Layout parse_layout(std::string_view text) {
  for (auto l : {Layout::Uniform, Layout::SegregatedCity, Layout::Checkerboard}) {
    if (layout_name(l) == text) return l;
  }
  throw ValidationError("unknown layout '" + std::string(text) + "' (uniform|segregated|checkerboard)");
}

RegionData synthetic_state(const StateSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) throw ValidationError("grid dimensions must be positive");
  if (spec.mean_population - spec.population_spread < 1) {
    throw ValidationError("population spread would allow empty precincts");
  }
  if (spec.county_size < 1) throw ValidationError("county_size must be positive");

  Rng rng(spec.seed);
  const double core_r = spec.rows * 0.3;
  const double core_c = spec.cols * 0.3;
  const double radius = 0.35 * std::max(spec.rows, spec.cols);

  std::vector<PrecinctAttributes> nodes;
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      PrecinctAttributes p;
      p.id = cell_id(r, c);
      p.county = "k" + std::to_string(r / spec.county_size) + "_" + std::to_string(c / spec.county_size);
      const auto pop = spec.mean_population - spec.population_spread +
                       static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(2 * spec.population_spread + 1)));

      double black = 0.0;
      switch (spec.layout) {
        case Layout::Uniform: black = uniform_between(rng, 0.05, 0.40); break;
        case Layout::SegregatedCity: {
          const double d = std::hypot(r - core_r, c - core_c) / radius;
          black = std::clamp(0.03 + 0.9 * std::exp(-d * d) + uniform_between(rng, -0.05, 0.05), 0.0, 0.95);
          break;
        }
        case Layout::Checkerboard:
          black = ((r + c) % 2 == 0 ? 0.7 : 0.15) + uniform_between(rng, -0.05, 0.05);
          break;
      }
      const double hispanic = uniform_between(rng, 0.0, 0.12);
      const double asian = uniform_between(rng, 0.0, 0.05);
      const double other = uniform_between(rng, 0.0, 0.03);
      const double white = std::max(0.0, 1.0 - black - hispanic - asian - other);
      const std::array<double, kNumRaces> shares{white, black, hispanic, asian, other};
      const auto counts = noise::controlled_round(shares, pop);
      std::copy(counts.begin(), counts.end(), p.race.begin());

      const double minority = 1.0 - static_cast<double>(p.race[0]) / static_cast<double>(pop);
      p.turnout = uniform_between(rng, 0.35, 0.75);
      const double dem_share = std::clamp(0.28 + 0.6 * minority + uniform_between(rng, -0.08, 0.08), 0.05, 0.95);
      const auto voters = static_cast<std::int64_t>(std::llround(p.turnout * static_cast<double>(pop)));
      p.votes_dem = static_cast<std::int64_t>(std::llround(dem_share * static_cast<double>(voters)));
      p.votes_rep = voters - p.votes_dem;
      nodes.push_back(std::move(p));
    }
  }
  RegionData data{RegionGraph::build(std::move(nodes), grid_edges(spec.rows, spec.cols)), {}};
  data.scenarios.push_back(scenario_from_nodes(data.graph, "census"));
  return data;
}

bisg::NameTables synthetic_name_tables(int names_per_race, std::uint64_t seed) {
  if (names_per_race < 1) throw ValidationError("names_per_race must be positive");
  Rng rng(seed);
  static constexpr std::array<char, kNumRaces> kTag = {'W', 'B', 'H', 'A', 'O'};

  auto make = [&](char prefix, double leak) {
    const auto n = static_cast<std::size_t>(names_per_race) * kNumRaces;
    std::vector<std::string> names(n);
    std::vector<bisg::RaceVector> lik(n);
    for (std::size_t owner = 0; owner < kNumRaces; ++owner) {
      for (int i = 0; i < names_per_race; ++i) {
        const auto idx = owner * static_cast<std::size_t>(names_per_race) + static_cast<std::size_t>(i);
        names[idx] = std::string(1, prefix) + kTag[owner] + std::to_string(i);
        for (std::size_t r = 0; r < kNumRaces; ++r) {
          const double base = r == owner ? 1.0 - leak : leak / static_cast<double>(kNumRaces - 1);
          lik[idx][r] = base * uniform_between(rng, 0.5, 1.5);
        }
      }
    }
    // Each race's column is a distribution over names.
    for (std::size_t r = 0; r < kNumRaces; ++r) {
      double z = 0.0;
      for (const auto& l : lik) z += l[r];
      for (auto& l : lik) l[r] /= z;
    }
    bisg::NameTable table;
    for (std::size_t i = 0; i < n; ++i) table.set(names[i], lik[i]);
    return table;
  };
  bisg::NameTables tables;
  tables.surname = make('S', 0.3);
  tables.first = make('F', 0.45);
  tables.middle = make('M', 0.6);
  return tables;
}

std::vector<bisg::VoterRecord> synthetic_voters(const RegionGraph& graph, const PopulationScenario& scenario,
                                                const bisg::NameTables& tables, int voters_per_precinct,
                                                std::uint64_t seed) {
  scenario.validate(graph);
  if (voters_per_precinct < 1) throw ValidationError("voters_per_precinct must be positive");

  struct Sampler {
    std::vector<std::string> names;
    std::array<std::vector<double>, kNumRaces> cumulative;

    explicit Sampler(const bisg::NameTable& table) {
      for (const auto& [name, lik] : table.sorted()) {
        names.push_back(name);
        for (std::size_t r = 0; r < kNumRaces; ++r) {
          cumulative[r].push_back((cumulative[r].empty() ? 0.0 : cumulative[r].back()) + lik[r]);
        }
      }
    }
    const std::string& draw(std::size_t race, Rng& rng) const {
      const auto& cum = cumulative[race];
      const double u = rng.uniform() * cum.back();
      const auto it = std::upper_bound(cum.begin(), cum.end(), u);
      return names[std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), names.size() - 1)];
    }
  };
  const Sampler surnames(tables.surname);
  const Sampler firsts(tables.first);
  const Sampler middles(tables.middle);

  Rng rng(seed);
  std::vector<bisg::VoterRecord> voters;
  std::size_t next_id = 0;
  for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
    const auto pop = scenario.population[v];
    if (pop <= 0) continue;
    for (int i = 0; i < voters_per_precinct; ++i) {
      auto pick = static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(pop)));
      std::size_t race = 0;
      while (pick >= scenario.race[v][race]) pick -= scenario.race[v][race++];
      bisg::VoterRecord rec;
      rec.voter_id = "v" + std::to_string(next_id++);
      rec.surname = surnames.draw(race, rng);
      rec.first = firsts.draw(race, rng);
      if (rng.bernoulli(0.7)) rec.middle = middles.draw(race, rng);
      rec.geography = graph.node(static_cast<int>(v)).id;
      rec.true_race = kAllRaces[race];
      voters.push_back(std::move(rec));
    }
  }
  return voters;
}

}  // namespace redistrict::fixtures
