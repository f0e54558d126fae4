#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "redistrict/bisg.hpp"
#include "redistrict/graph.hpp"

namespace redistrict::fixtures {

/// Rook-adjacency grid with ids "r{row}c{col}", all in county "c0", one
/// resident of race White per cell, one Democratic and one Republican vote.
RegionGraph grid_graph(int rows, int cols);

/// Grid with every precinct holding `population` White residents.
RegionData unit_grid(int rows, int cols, std::int64_t population = 1);

enum class Layout {
  Uniform,         // mixed neighbourhoods with independent compositions
  SegregatedCity,  // a minority core whose share falls off with distance
  Checkerboard,    // alternating majority-White and majority-Black precincts
};

std::string_view layout_name(Layout layout);
Layout parse_layout(std::string_view text);

struct StateSpec {
  int rows = 10;
  int cols = 10;
  Layout layout = Layout::SegregatedCity;
  std::int64_t mean_population = 1000;
  /// Half-width of the uniform spread around mean_population.
  std::int64_t population_spread = 300;
  /// Counties are county_size x county_size blocks of precincts.
  int county_size = 5;
  std::uint64_t seed = 1;
};

/// Synthetic "state": grid precincts with race counts, votes, turnout and
/// county labels. Carries one scenario, "census", built from the node counts.
RegionData synthetic_state(const StateSpec& spec);

/// Synthetic P(name | race) tables: a pool of names per race with
/// overlapping likelihoods, so no single name identifies race perfectly.
bisg::NameTables synthetic_name_tables(int names_per_race, std::uint64_t seed);

/// Voters drawn from the scenario's race composition with names sampled from
/// P(name | race). Voter ids are "v{n}"; true_race is always set.
std::vector<bisg::VoterRecord> synthetic_voters(const RegionGraph& graph, const PopulationScenario& scenario,
                                                const bisg::NameTables& tables, int voters_per_precinct,
                                                std::uint64_t seed);

}  // namespace redistrict::fixtures
