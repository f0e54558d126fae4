#include "redistrict/spanning_tree.hpp"

#include <algorithm>

#include "redistrict/error.hpp"
#include "redistrict/parity.hpp"

namespace redistrict {

std::vector<std::pair<int, int>> SpanningTree::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(nodes.empty() ? 0 : nodes.size() - 1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (parent_pos[i] >= 0) out.emplace_back(nodes[i], parent(i));
  }
  return out;
}

namespace {

// Preorder layout from local parent links (local indices, -1 at root).
SpanningTree layout(std::span<const int> subset, const std::vector<int>& local_parent, int local_root) {
  const auto m = subset.size();
  std::vector<int> child_count(m + 1, 0);
  for (std::size_t i = 0; i < m; ++i) {
    if (local_parent[i] >= 0) ++child_count[static_cast<std::size_t>(local_parent[i]) + 1];
  }
  for (std::size_t i = 0; i < m; ++i) child_count[i + 1] += child_count[i];
  std::vector<int> children(m > 0 ? m - 1 : 0);
  std::vector<int> fill(child_count.begin(), child_count.end() - 1);
  for (std::size_t i = 0; i < m; ++i) {
    if (local_parent[i] >= 0) {
      children[static_cast<std::size_t>(fill[static_cast<std::size_t>(local_parent[i])]++)] = static_cast<int>(i);
    }
  }

  SpanningTree tree;
  tree.root = subset[static_cast<std::size_t>(local_root)];
  tree.nodes.reserve(m);
  tree.parent_pos.reserve(m);
  std::vector<int> position(m, -1);
  // Iterative DFS; children pushed in reverse so preorder follows insertion order.
  std::vector<int> stack{local_root};
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    const auto ui = static_cast<std::size_t>(u);
    position[ui] = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(subset[ui]);
    tree.parent_pos.push_back(local_parent[ui] < 0 ? -1 : position[static_cast<std::size_t>(local_parent[ui])]);
    for (int c = child_count[ui + 1] - 1; c >= child_count[ui]; --c) {
      stack.push_back(children[static_cast<std::size_t>(c)]);
    }
  }
  if (tree.nodes.size() != m) throw ValidationError("parent links do not form a single tree");

  tree.subtree_size.assign(m, 1);
  for (std::size_t i = m; i-- > 1;) {
    tree.subtree_size[static_cast<std::size_t>(tree.parent_pos[i])] += tree.subtree_size[i];
  }
  return tree;
}

}  // namespace

SpanningTree tree_from_parents(std::span<const int> subset, std::span<const int> parent_of) {
  const auto m = subset.size();
  if (m == 0 || parent_of.size() != m) throw ValidationError("tree_from_parents: size mismatch");
  std::unordered_map<int, int> local;
  for (std::size_t i = 0; i < m; ++i) local.emplace(subset[i], static_cast<int>(i));
  std::vector<int> local_parent(m, -1);
  int root = -1;
  for (std::size_t i = 0; i < m; ++i) {
    if (parent_of[i] < 0) {
      if (root >= 0) throw ValidationError("tree_from_parents: more than one root");
      root = static_cast<int>(i);
      continue;
    }
    const auto it = local.find(parent_of[i]);
    if (it == local.end()) throw ValidationError("tree_from_parents: parent outside subset");
    local_parent[i] = it->second;
  }
  if (root < 0) throw ValidationError("tree_from_parents: no root");
  return layout(subset, local_parent, root);
}

SpanningTree uniform_spanning_tree(const RegionGraph& graph, std::span<const int> subset, Rng& rng) {
  const auto m = subset.size();
  if (m == 0) throw ValidationError("cannot draw a spanning tree of an empty node set");

  std::vector<int> local(graph.num_nodes(), -1);
  for (std::size_t i = 0; i < m; ++i) local[static_cast<std::size_t>(subset[i])] = static_cast<int>(i);

  // Induced adjacency in local indices (CSR).
  std::vector<int> offsets(m + 1, 0);
  std::vector<int> adj;
  adj.reserve(m * 4);
  for (std::size_t i = 0; i < m; ++i) {
    for (int w : graph.neighbors(subset[i])) {
      const int lw = local[static_cast<std::size_t>(w)];
      if (lw >= 0) adj.push_back(lw);
    }
    offsets[i + 1] = static_cast<int>(adj.size());
  }

  // Connectivity check before walking: a random walk on a disconnected set never terminates.
  {
    std::vector<char> seen(m, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    std::size_t reached = 0;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      ++reached;
      for (int k = offsets[static_cast<std::size_t>(u)]; k < offsets[static_cast<std::size_t>(u) + 1]; ++k) {
        const int w = adj[static_cast<std::size_t>(k)];
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          stack.push_back(w);
        }
      }
    }
    if (reached != m) {
      throw ValidationError("node subset is disconnected: precinct '" +
                            graph.node(subset[static_cast<std::size_t>(std::find(seen.begin(), seen.end(), 0) - seen.begin())]).id +
                            "' is unreachable");
    }
  }

  std::vector<char> in_tree(m, 0);
  std::vector<int> next(m, -1);
  const int root = static_cast<int>(rng.index(m));
  in_tree[static_cast<std::size_t>(root)] = 1;

  for (std::size_t start = 0; start < m; ++start) {
    auto u = start;
    while (!in_tree[u]) {
      const auto deg = static_cast<std::uint64_t>(offsets[u + 1] - offsets[u]);
      const int w = adj[static_cast<std::size_t>(offsets[u]) + rng.index(deg)];
      next[u] = w;
      u = static_cast<std::size_t>(w);
    }
    u = start;
    while (!in_tree[u]) {
      in_tree[u] = 1;
      u = static_cast<std::size_t>(next[u]);
    }
  }
  next[static_cast<std::size_t>(root)] = -1;
  return layout(subset, next, root);
}

std::vector<TreeCut> balanced_cut_edges(const SpanningTree& tree, std::span<const std::int64_t> populations,
                                        double target, double tolerance, int districts) {
  std::vector<TreeCut> cuts;
  const auto m = tree.size();
  if (m < 2 || districts < 2) return cuts;

  std::vector<std::int64_t> sub(m);
  for (std::size_t i = 0; i < m; ++i) sub[i] = populations[static_cast<std::size_t>(tree.nodes[i])];
  for (std::size_t i = m; i-- > 1;) sub[static_cast<std::size_t>(tree.parent_pos[i])] += sub[i];
  const std::int64_t whole = sub[0];

  const double one = target;
  const double rest = target * static_cast<double>(districts - 1);
  for (std::size_t i = 1; i < m; ++i) {
    const auto child = static_cast<double>(sub[i]);
    const auto other = static_cast<double>(whole - sub[i]);
    TreeCut cut{i, tree.nodes[i], tree.parent(i), sub[i], 1};
    if (districts == 2) {
      if (within_tolerance(child, one, tolerance) && within_tolerance(other, one, tolerance)) cuts.push_back(cut);
      continue;
    }
    if (within_tolerance(child, one, tolerance) && within_tolerance(other, rest, tolerance)) cuts.push_back(cut);
    if (within_tolerance(child, rest, tolerance) && within_tolerance(other, one, tolerance)) {
      cut.child_districts = districts - 1;
      cuts.push_back(cut);
    }
  }
  return cuts;
}

}  // namespace redistrict
