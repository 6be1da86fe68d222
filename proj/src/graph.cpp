#include "tailgraph/graph.hpp"

#include <deque>
#include <string>

#include "tailgraph/error.hpp"

namespace tailgraph {

Graph::Graph(int vertex_count, std::vector<Edge> edges)
    : vertex_count_(vertex_count) {
  if (vertex_count < 1) {
    throw Error(ErrorCode::InvalidArgument, "graph needs at least one vertex");
  }
  adjacency_.resize(static_cast<std::size_t>(vertex_count));
  for (auto [u, v] : edges) {
    if (u < 1 || v < 1 || u > vertex_count || v > vertex_count) {
      throw Error(ErrorCode::InvalidArgument,
                  "edge (" + std::to_string(u) + "," + std::to_string(v) +
                      ") has an endpoint outside 1.." +
                      std::to_string(vertex_count));
    }
    if (u == v) {
      throw Error(ErrorCode::InvalidArgument,
                  "loop at vertex " + std::to_string(u));
    }
    if (u > v) std::swap(u, v);
    edges_.emplace_back(u, v);
  }
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
    throw Error(ErrorCode::InvalidArgument, "duplicate edge in edge list");
  }
  for (auto [u, v] : edges_) {
    adjacency_[u - 1].push_back(v);
    adjacency_[v - 1].push_back(u);
  }
  for (auto& n : adjacency_) std::sort(n.begin(), n.end());
}

bool Graph::adjacent(Vertex u, Vertex v) const {
  return contains(adjacency_.at(u - 1), v);
}

bool Graph::is_connected() const {
  std::vector<char> seen(adjacency_.size(), 0);
  std::deque<Vertex> queue{1};
  seen[0] = 1;
  int reached = 1;
  while (!queue.empty()) {
    Vertex u = queue.front();
    queue.pop_front();
    for (Vertex w : neighbors(u)) {
      if (!seen[w - 1]) {
        seen[w - 1] = 1;
        ++reached;
        queue.push_back(w);
      }
    }
  }
  return reached == vertex_count_;
}

bool Graph::is_clique(const VertexSet& s) const {
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j)
      if (!adjacent(s[i], s[j])) return false;
  return true;
}

VertexSet Graph::vertices() const {
  VertexSet out(static_cast<std::size_t>(vertex_count_));
  for (int i = 0; i < vertex_count_; ++i) out[i] = i + 1;
  return out;
}

int CliqueOrdering::find_clique_containing(const VertexSet& s) const {
  for (std::size_t i = 0; i < cliques.size(); ++i)
    if (is_subset(s, cliques[i])) return static_cast<int>(i);
  return -1;
}

std::vector<Vertex> maximum_cardinality_search(const Graph& graph, Vertex start,
                                               const VertexSet& preferred) {
  const int d = graph.vertex_count();
  if (start < 1 || start > d) {
    throw Error(ErrorCode::InvalidArgument,
                "start vertex " + std::to_string(start) + " not in graph");
  }
  std::vector<int> weight(d, 0);
  std::vector<char> visited(d, 0);
  std::vector<Vertex> order;
  order.reserve(d);
  Vertex next = start;
  for (int step = 0; step < d; ++step) {
    if (step > 0) {
      next = 0;
      int best = -1;
      bool best_preferred = false;
      for (Vertex u = 1; u <= d; ++u) {
        if (visited[u - 1]) continue;
        const bool pref = contains(preferred, u);
        const int w = weight[u - 1];
        if (w > best || (w == best && pref && !best_preferred)) {
          best = w;
          best_preferred = pref;
          next = u;
        }
      }
    }
    visited[next - 1] = 1;
    order.push_back(next);
    for (Vertex w : graph.neighbors(next))
      if (!visited[w - 1]) ++weight[w - 1];
  }
  return order;
}

namespace {

// Neighbours of order[i] that appear earlier in `order`.
std::vector<VertexSet> earlier_neighbours(const Graph& graph,
                                          const std::vector<Vertex>& order) {
  std::vector<int> position(graph.vertex_count(), 0);
  for (std::size_t i = 0; i < order.size(); ++i) position[order[i] - 1] = static_cast<int>(i);
  std::vector<VertexSet> out(order.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    for (Vertex w : graph.neighbors(order[i]))
      if (position[w - 1] < static_cast<int>(i)) out[i].push_back(w);
  return out;
}

// Shortest path from `from` to `to` avoiding the closed neighbourhood of
// `centre` (except the endpoints).  Empty when none exists.
std::vector<Vertex> avoiding_path(const Graph& graph, Vertex centre, Vertex from,
                                  Vertex to) {
  const int d = graph.vertex_count();
  std::vector<char> blocked(d, 0);
  blocked[centre - 1] = 1;
  for (Vertex w : graph.neighbors(centre)) blocked[w - 1] = 1;
  blocked[from - 1] = 0;
  blocked[to - 1] = 0;
  std::vector<Vertex> parent(d, 0);
  std::vector<char> seen(d, 0);
  std::deque<Vertex> queue{from};
  seen[from - 1] = 1;
  while (!queue.empty()) {
    Vertex u = queue.front();
    queue.pop_front();
    if (u == to) break;
    for (Vertex w : graph.neighbors(u)) {
      if (blocked[w - 1] || seen[w - 1]) continue;
      // The path must not shortcut through the endpoint pair directly.
      if (u == from && w == to) continue;
      seen[w - 1] = 1;
      parent[w - 1] = u;
      queue.push_back(w);
    }
  }
  if (!seen[to - 1]) return {};
  std::vector<Vertex> path;
  for (Vertex u = to; u != from; u = parent[u - 1]) path.push_back(u);
  path.push_back(from);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<Vertex> chordless_cycle(const Graph& graph) {
  for (Vertex x = 1; x <= graph.vertex_count(); ++x) {
    const auto& nb = graph.neighbors(x);
    for (std::size_t a = 0; a < nb.size(); ++a) {
      for (std::size_t b = a + 1; b < nb.size(); ++b) {
        if (graph.adjacent(nb[a], nb[b])) continue;
        auto path = avoiding_path(graph, x, nb[a], nb[b]);
        if (path.empty()) continue;
        std::vector<Vertex> cycle{x};
        cycle.insert(cycle.end(), path.begin(), path.end());
        return cycle;
      }
    }
  }
  return {};
}

void require_connected(const Graph& graph) {
  if (!graph.is_connected())
    throw Error(ErrorCode::NotConnected, "graph is not connected");
}

CliqueOrdering cliques_from_mcs(const Graph& graph,
                                const std::vector<Vertex>& order) {
  auto earlier = earlier_neighbours(graph, order);
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (!graph.is_clique(earlier[i])) {
      throw Error(ErrorCode::NotChordal, "graph has a chordless cycle",
                  chordless_cycle(graph));
    }
  }
  CliqueOrdering out;
  int previous = -1;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int card = static_cast<int>(earlier[i].size());
    if (card <= previous || out.cliques.empty()) {
      out.cliques.push_back(set_union(earlier[i], VertexSet{order[i]}));
      out.separators.push_back(earlier[i]);
    } else {
      out.cliques.back() = set_union(out.cliques.back(), VertexSet{order[i]});
    }
    previous = card;
  }
  out.parents.assign(out.cliques.size(), -1);
  for (std::size_t i = 1; i < out.cliques.size(); ++i) {
    for (std::size_t k = 0; k < i; ++k) {
      if (is_subset(out.separators[i], out.cliques[k])) {
        out.parents[i] = static_cast<int>(k);
        break;
      }
    }
  }
  return out;
}

}  // namespace

bool is_perfect_elimination_ordering(const Graph& graph,
                                     std::span<const Vertex> order) {
  const int d = graph.vertex_count();
  if (static_cast<int>(order.size()) != d) return false;
  std::vector<int> position(d, -1);
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] < 1 || order[i] > d || position[order[i] - 1] >= 0) return false;
    position[order[i] - 1] = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    VertexSet later;
    for (Vertex w : graph.neighbors(order[i]))
      if (position[w - 1] > static_cast<int>(i)) later.push_back(w);
    if (!graph.is_clique(later)) return false;
  }
  return true;
}

std::vector<Vertex> validate_chordal(const Graph& graph) {
  require_connected(graph);
  auto order = maximum_cardinality_search(graph, 1);
  auto earlier = earlier_neighbours(graph, order);
  for (const auto& e : earlier) {
    if (!graph.is_clique(e)) {
      throw Error(ErrorCode::NotChordal, "graph has a chordless cycle",
                  chordless_cycle(graph));
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

CliqueOrdering clique_ordering(const Graph& graph, Vertex root_vertex) {
  require_connected(graph);
  return cliques_from_mcs(graph, maximum_cardinality_search(graph, root_vertex));
}

CliqueOrdering clique_ordering(const Graph& graph, Vertex root_vertex,
                               const VertexSet& root_clique) {
  require_connected(graph);
  if (!contains(root_clique, root_vertex)) {
    throw Error(ErrorCode::InvalidArgument,
                "root clique " + format_set(root_clique) +
                    " does not contain vertex " + std::to_string(root_vertex));
  }
  auto ordering = cliques_from_mcs(
      graph, maximum_cardinality_search(graph, root_vertex, root_clique));
  if (ordering.cliques.front() != root_clique) {
    throw Error(ErrorCode::InvalidArgument,
                format_set(root_clique) + " is not a maximal clique");
  }
  return ordering;
}

JunctionTree junction_tree(const CliqueOrdering& ordering) {
  JunctionTree tree;
  tree.nodes = ordering.cliques;
  for (std::size_t i = 1; i < ordering.size(); ++i) {
    tree.tree_edges.emplace_back(ordering.parents[i], static_cast<int>(i));
    tree.edge_labels.push_back(ordering.separators[i]);
  }
  return tree;
}

bool is_block_graph(const CliqueOrdering& ordering) {
  for (std::size_t i = 1; i < ordering.size(); ++i)
    if (ordering.separators[i].size() != 1) return false;
  return true;
}

}  // namespace tailgraph
