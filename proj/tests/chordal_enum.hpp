#pragma once

// Enumeration of connected chordal graphs up to isomorphism, plus brute-force
// oracles for maximal cliques, RIP and the junction-tree path property.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <set>
#include <vector>

#include "tailgraph/graph.hpp"

namespace tailgraph::testing {

// Adjacency as one bitmask per vertex (0-based).
using Adjacency = std::vector<std::uint32_t>;

inline std::uint64_t edge_code(const Adjacency& adj, const std::vector<int>& perm) {
  // Upper triangle of the permuted adjacency, row-major, as a bit string.
  const int n = static_cast<int>(adj.size());
  std::uint64_t code = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      code = (code << 1) | ((adj[perm[i]] >> perm[j]) & 1u);
  return code;
}

// Canonical form: colour refinement, then the maximum code over all
// permutations that respect the refined colour order.
inline std::uint64_t canonical_code(const Adjacency& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<long> colour(n, 0);
  for (int round = 0; round < n; ++round) {
    std::vector<std::vector<long>> sig(n);
    for (int v = 0; v < n; ++v) {
      sig[v].push_back(colour[v]);
      std::vector<long> nb;
      for (int u = 0; u < n; ++u)
        if ((adj[v] >> u) & 1u) nb.push_back(colour[u]);
      std::sort(nb.begin(), nb.end());
      sig[v].insert(sig[v].end(), nb.begin(), nb.end());
    }
    std::vector<std::vector<long>> distinct(sig.begin(), sig.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<long> next(n);
    for (int v = 0; v < n; ++v)
      next[v] = std::lower_bound(distinct.begin(), distinct.end(), sig[v]) - distinct.begin();
    if (next == colour) break;
    colour = next;
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return colour[a] != colour[b] ? colour[a] < colour[b] : a < b; });
  std::vector<std::pair<int, int>> classes;  // [begin, end) ranges of equal colour
  for (int i = 0; i < n;) {
    int j = i;
    while (j < n && colour[order[j]] == colour[order[i]]) ++j;
    classes.push_back({i, j});
    i = j;
  }
  std::uint64_t best = 0;
  std::function<void(std::size_t)> recurse = [&](std::size_t c) {
    if (c == classes.size()) {
      best = std::max(best, edge_code(adj, order));
      return;
    }
    auto [b, e] = classes[c];
    std::sort(order.begin() + b, order.begin() + e);
    do {
      recurse(c + 1);
    } while (std::next_permutation(order.begin() + b, order.begin() + e));
  };
  recurse(0);
  return best;
}

inline Graph to_graph(const Adjacency& adj) {
  std::vector<Edge> edges;
  const int n = static_cast<int>(adj.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if ((adj[i] >> j) & 1u) edges.push_back({i + 1, j + 1});
  return Graph(n, edges);
}

inline bool is_clique_mask(const Adjacency& adj, std::uint32_t mask) {
  for (std::size_t v = 0; v < adj.size(); ++v)
    if (((mask >> v) & 1u) && ((adj[v] | (1u << v)) & mask) != mask) return false;
  return true;
}

// Every connected chordal graph on `n` vertices, one per isomorphism class.
// A graph is chordal iff it can be built by repeatedly adding a vertex whose
// earlier neighbours form a clique; connectivity needs that clique nonempty.
inline std::vector<std::vector<Adjacency>> connected_chordal_graphs(int max_n) {
  std::vector<std::vector<Adjacency>> by_size(max_n + 1);
  by_size[1] = {Adjacency{0u}};
  for (int n = 2; n <= max_n; ++n) {
    std::set<std::uint64_t> seen;
    for (const auto& g : by_size[n - 1]) {
      const std::uint32_t full = (1u << (n - 1)) - 1;
      for (std::uint32_t mask = 1; mask <= full; ++mask) {
        if (!is_clique_mask(g, mask)) continue;
        Adjacency h = g;
        h.push_back(mask);
        for (int v = 0; v < n - 1; ++v)
          if ((mask >> v) & 1u) h[v] |= 1u << (n - 1);
        if (seen.insert(canonical_code(h)).second) by_size[n].push_back(h);
      }
    }
  }
  return by_size;
}

// Maximal cliques by exhaustive subset search (n <= 12).
inline std::vector<VertexSet> brute_maximal_cliques(const Graph& g) {
  const int n = g.vertex_count();
  std::vector<std::uint32_t> cliques;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    VertexSet s;
    for (int v = 0; v < n; ++v)
      if ((mask >> v) & 1u) s.push_back(v + 1);
    if (g.is_clique(s)) cliques.push_back(mask);
  }
  std::vector<VertexSet> out;
  for (auto m : cliques) {
    bool maximal = true;
    for (auto o : cliques)
      if (o != m && (o & m) == m) maximal = false;
    if (!maximal) continue;
    VertexSet s;
    for (int v = 0; v < n; ++v)
      if ((m >> v) & 1u) s.push_back(v + 1);
    out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// The running-intersection property as written: S_i = C_i ∩ (C_1 ∪ … ∪ C_{i-1})
// is contained in some earlier clique.
inline bool satisfies_rip(const CliqueOrdering& o) {
  VertexSet seen;
  for (std::size_t i = 0; i < o.size(); ++i) {
    const VertexSet s = set_intersection(o.cliques[i], seen);
    if (s != o.separators[i]) return false;
    if (i > 0) {
      bool found = false;
      for (std::size_t k = 0; k < i; ++k) found = found || is_subset(s, o.cliques[k]);
      if (!found) return false;
      if (o.parents[i] < 0 || o.parents[i] >= static_cast<int>(i)) return false;
      if (!is_subset(s, o.cliques[o.parents[i]])) return false;
    }
    seen = set_union(seen, o.cliques[i]);
  }
  return true;
}

// Tree on the nodes, and for every pair the nodes on the connecting path
// contain their intersection.
inline bool satisfies_path_property(const JunctionTree& t) {
  const std::size_t m = t.nodes.size();
  if (t.tree_edges.size() + 1 != m) return false;
  std::vector<std::vector<int>> adj(m);
  for (std::size_t e = 0; e < t.tree_edges.size(); ++e) {
    auto [a, b] = t.tree_edges[e];
    if (set_intersection(t.nodes[a], t.nodes[b]) != t.edge_labels[e]) return false;
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (std::size_t src = 0; src < m; ++src) {
    std::vector<int> parent(m, -2);
    parent[src] = -1;
    std::vector<int> stack{static_cast<int>(src)};
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      for (int y : adj[x])
        if (parent[y] == -2) {
          parent[y] = x;
          stack.push_back(y);
        }
    }
    for (std::size_t dst = 0; dst < m; ++dst) {
      if (parent[dst] == -2) return false;
      const VertexSet shared = set_intersection(t.nodes[src], t.nodes[dst]);
      for (int x = static_cast<int>(dst); x != -1; x = parent[x])
        if (!is_subset(shared, t.nodes[x])) return false;
    }
  }
  return true;
}

}  // namespace tailgraph::testing
