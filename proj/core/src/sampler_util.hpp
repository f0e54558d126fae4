#pragma once

#include <span>
#include <vector>

#include "redistrict/graph.hpp"

namespace redistrict::detail {

/// Counties touching more than one label; label 0 (unassigned) counts as a
/// block of its own.
inline int partial_county_splits(const RegionGraph& graph, std::span<const int> labels) {
  std::vector<int> first(graph.num_counties(), -1);
  std::vector<char> split(graph.num_counties(), 0);
  int count = 0;
  for (std::size_t v = 0; v < labels.size(); ++v) {
    const auto c = static_cast<std::size_t>(graph.county_of(static_cast<int>(v)));
    if (first[c] < 0) {
      first[c] = labels[v];
    } else if (first[c] != labels[v] && !split[c]) {
      split[c] = 1;
      ++count;
    }
  }
  return count;
}

/// Edges with one endpoint labelled `a` and the other labelled `b`.
inline int boundary_between(const RegionGraph& graph, std::span<const int> labels, int a, int b) {
  int count = 0;
  for (const auto& [u, v] : graph.edges()) {
    const int lu = labels[static_cast<std::size_t>(u)];
    const int lv = labels[static_cast<std::size_t>(v)];
    if ((lu == a && lv == b) || (lu == b && lv == a)) ++count;
  }
  return count;
}

}  // namespace redistrict::detail
