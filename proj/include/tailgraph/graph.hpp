#pragma once

#include <span>
#include <utility>
#include <vector>

#include "tailgraph/vertex_set.hpp"

namespace tailgraph {

using Edge = std::pair<Vertex, Vertex>;

// Simple undirected graph on vertices 1..d.  Construction rejects loops,
// duplicate edges and out-of-range endpoints.
class Graph {
 public:
  Graph(int vertex_count, std::vector<Edge> edges);

  int vertex_count() const noexcept { return vertex_count_; }
  // Normalised so that first < second, sorted lexicographically.
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const VertexSet& neighbors(Vertex v) const { return adjacency_.at(v - 1); }
  bool adjacent(Vertex u, Vertex v) const;
  bool is_connected() const;
  bool is_clique(const VertexSet& s) const;
  VertexSet vertices() const;

 private:
  int vertex_count_;
  std::vector<Edge> edges_;
  std::vector<VertexSet> adjacency_;
};

// Ordered maximal cliques C_1..C_N with separators S_i = C_i ∩ (C_1 ∪ … ∪
// C_{i-1}).  Index 0 is the root clique; separators[0] is empty and
// parents[0] == -1.  For i >= 1, parents[i] is the smallest k < i with
// S_i ⊆ C_k.
struct CliqueOrdering {
  std::vector<VertexSet> cliques;
  std::vector<VertexSet> separators;
  std::vector<int> parents;

  std::size_t size() const noexcept { return cliques.size(); }
  // Index of the first clique containing every vertex of `s`, or -1.
  int find_clique_containing(const VertexSet& s) const;
};

struct JunctionTree {
  std::vector<VertexSet> nodes;
  std::vector<std::pair<int, int>> tree_edges;  // (parent, child), 0-based
  std::vector<VertexSet> edge_labels;           // separators, aligned with tree_edges
};

// Maximum cardinality search starting at `start`; ties go to the clique
// members in `preferred` first, then to the smallest label.  Returns the
// visit order.
std::vector<Vertex> maximum_cardinality_search(const Graph& graph, Vertex start,
                                               const VertexSet& preferred = {});

bool is_perfect_elimination_ordering(const Graph& graph,
                                     std::span<const Vertex> order);

// Returns a perfect elimination ordering (reverse MCS order from vertex 1).
// Throws NotConnected, or NotChordal with a chordless cycle of length >= 4 as
// the witness.
std::vector<Vertex> validate_chordal(const Graph& graph);

// Maximal cliques in running-intersection order with root_vertex ∈ C_1.
CliqueOrdering clique_ordering(const Graph& graph, Vertex root_vertex);

// Same, but with C_1 == root_clique, which must be a maximal clique.
CliqueOrdering clique_ordering(const Graph& graph, Vertex root_vertex,
                               const VertexSet& root_clique);

JunctionTree junction_tree(const CliqueOrdering& ordering);

bool is_block_graph(const CliqueOrdering& ordering);

}  // namespace tailgraph
