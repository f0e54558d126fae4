#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "redistrict/graph.hpp"
#include "redistrict/random.hpp"

namespace redistrict {

/// Rooted spanning tree over a node subset, stored in DFS preorder so every
/// subtree occupies a contiguous range of `nodes`.
struct SpanningTree {
  int root = -1;
  std::vector<int> nodes;         // global node indices, preorder
  std::vector<int> parent_pos;    // position of the parent in `nodes`; -1 at the root
  std::vector<int> subtree_size;  // per position, including the node itself

  std::size_t size() const { return nodes.size(); }
  int parent(std::size_t pos) const {
    return parent_pos[pos] < 0 ? -1 : nodes[static_cast<std::size_t>(parent_pos[pos])];
  }
  std::span<const int> subtree(std::size_t pos) const {
    return {nodes.data() + pos, static_cast<std::size_t>(subtree_size[pos])};
  }
  /// Tree edges as (child, parent) global index pairs.
  std::vector<std::pair<int, int>> edges() const;
};

/// Uniformly random spanning tree of the subgraph induced by `subset`
/// (Wilson's loop-erased random walk). Throws ValidationError if the induced
/// subgraph is empty or disconnected.
SpanningTree uniform_spanning_tree(const RegionGraph& graph, std::span<const int> subset, Rng& rng);

/// Builds the rooted preorder representation from parent links.
/// `parent_of[i]` is the parent of `subset[i]` as a global index, -1 at the root.
SpanningTree tree_from_parents(std::span<const int> subset, std::span<const int> parent_of);

struct TreeCut {
  std::size_t position = 0;  // preorder position of the child endpoint
  int child = -1;
  int parent = -1;
  std::int64_t child_population = 0;
  /// Districts the child-side component will hold; the other side holds the rest.
  int child_districts = 1;
};

/// Every tree edge whose removal leaves two components that are each within
/// `tolerance` of their target: `target` times the number of districts that
/// side will hold. When `districts` > 2 one side becomes a single district
/// and the other keeps districts-1; an edge may qualify in both orientations
/// and is then reported once per orientation. `populations` is indexed by
/// global node index.
std::vector<TreeCut> balanced_cut_edges(const SpanningTree& tree, std::span<const std::int64_t> populations,
                                        double target, double tolerance, int districts = 2);

}  // namespace redistrict
