#include <doctest.h>

#include <set>

#include "chordal_enum.hpp"
#include "support.hpp"
#include "tailgraph/error.hpp"

using namespace tailgraph;
using namespace tailgraph::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

bool chordal_by_definition(const Graph& g) {
  // Every cycle of length >= 4 has a chord: equivalently no induced cycle of
  // length >= 4.  Search induced cycles through subsets (n <= 6).
  const int n = g.vertex_count();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    VertexSet s;
    for (int v = 0; v < n; ++v)
      if ((mask >> v) & 1u) s.push_back(v + 1);
    if (s.size() < 4) continue;
    bool two_regular = true;
    for (Vertex v : s) {
      int deg = 0;
      for (Vertex u : s) deg += g.adjacent(u, v);
      two_regular = two_regular && deg == 2;
    }
    if (!two_regular) continue;
    // Induced 2-regular subgraph: a cycle if connected.
    std::set<Vertex> seen{s[0]};
    std::vector<Vertex> stack{s[0]};
    while (!stack.empty()) {
      Vertex x = stack.back();
      stack.pop_back();
      for (Vertex u : s)
        if (g.adjacent(x, u) && seen.insert(u).second) stack.push_back(u);
    }
    if (seen.size() == s.size()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("graph construction is validated") {
  CHECK(code_of([] { Graph(3, {{1, 1}}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { Graph(3, {{1, 2}, {2, 1}}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { Graph(3, {{1, 4}}); }) == ErrorCode::InvalidArgument);
  const Graph g(4, {{3, 1}, {2, 1}});
  CHECK(g.edges() == std::vector<Edge>{{1, 2}, {1, 3}});
  CHECK_FALSE(g.is_connected());
  CHECK(code_of([&] { validate_chordal(g); }) == ErrorCode::NotConnected);
}

TEST_CASE("chordless cycles are reported as witnesses") {
  const Graph c5(5, {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {1, 5}});
  try {
    validate_chordal(c5);
    FAIL("5-cycle accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotChordal);
    auto w = e.witness();
    CHECK(w.size() == 5);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(c5.adjacent(w[i], w[(i + 1) % w.size()]));
  }
  // A 4-cycle with a pendant triangle elsewhere.
  const Graph g(6, {{1, 2}, {2, 3}, {3, 4}, {1, 4}, {4, 5}, {5, 6}, {4, 6}});
  try {
    validate_chordal(g);
    FAIL("4-cycle accepted");
  } catch (const Error& e) {
    CHECK(make_set(e.witness()) == VertexSet{1, 2, 3, 4});
  }
}

TEST_CASE("validate_chordal agrees with the definition on all graphs up to 6 vertices") {
  for (int n = 1; n <= 6; ++n) {
    const int pairs = n * (n - 1) / 2;
    for (std::uint32_t bits = 0; bits < (1u << pairs); ++bits) {
      std::vector<Edge> edges;
      int k = 0;
      for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j, ++k)
          if ((bits >> k) & 1u) edges.push_back({i, j});
      const Graph g(n, edges);
      if (!g.is_connected()) continue;
      const bool expected = chordal_by_definition(g);
      bool accepted = true;
      try {
        const auto peo = validate_chordal(g);
        REQUIRE(is_perfect_elimination_ordering(g, peo));
      } catch (const Error& e) {
        REQUIRE(e.code() == ErrorCode::NotChordal);
        accepted = false;
      }
      REQUIRE(accepted == expected);
    }
  }
}

TEST_CASE("constructive enumeration matches brute force up to isomorphism") {
  const auto graphs = connected_chordal_graphs(6);
  for (int n = 1; n <= 6; ++n) {
    std::set<std::uint64_t> brute;
    const int pairs = n * (n - 1) / 2;
    for (std::uint32_t bits = 0; bits < (1u << pairs); ++bits) {
      Adjacency adj(n, 0u);
      int k = 0;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++k)
          if ((bits >> k) & 1u) {
            adj[i] |= 1u << j;
            adj[j] |= 1u << i;
          }
      const Graph g = to_graph(adj);
      if (!g.is_connected() || !chordal_by_definition(g)) continue;
      brute.insert(canonical_code(adj));
    }
    CHECK(brute.size() == graphs[n].size());
  }
  // Unlabelled connected chordal graphs: 1, 1, 2, 5, 15, 58.
  CHECK(graphs[4].size() == 5);
  CHECK(graphs[6].size() == 58);
}

TEST_CASE("clique ordering on a path gives a two-node junction tree") {
  const auto o = clique_ordering(path_graph(3), 3);
  REQUIRE(o.size() == 2);
  CHECK(o.cliques[0] == VertexSet{2, 3});
  CHECK(o.cliques[1] == VertexSet{1, 2});
  CHECK(o.separators[1] == VertexSet{2});
  const auto t = junction_tree(o);
  CHECK(t.nodes.size() == 2);
  CHECK(t.tree_edges == std::vector<std::pair<int, int>>{{0, 1}});
  CHECK(is_block_graph(o));
}

TEST_CASE("Goldner-Harary has 8 maximal cliques, 6 of them containing vertex 2") {
  const Graph g = goldner_harary();
  CHECK(g.edges().size() == 27);
  for (Vertex v : g.vertices()) {
    const auto o = clique_ordering(g, v);
    CHECK(o.size() == 8);
    CHECK(contains(o.cliques[0], v));
    CHECK(satisfies_rip(o));
    CHECK(satisfies_path_property(junction_tree(o)));
    auto sorted = o.cliques;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == brute_maximal_cliques(g));
  }
  const auto o = clique_ordering(g, 2);
  CHECK(std::count_if(o.cliques.begin(), o.cliques.end(),
                      [](const VertexSet& c) { return contains(c, 2); }) == 6);
  CHECK_FALSE(is_block_graph(o));
}

TEST_CASE("explicit root clique") {
  const Graph g = mixed_graph();
  const auto o = clique_ordering(g, 2, {1, 2});
  CHECK(o.cliques[0] == VertexSet{1, 2});
  CHECK(satisfies_rip(o));
  CHECK(code_of([&] { clique_ordering(g, 2, {2, 3}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { clique_ordering(g, 3, {1, 2}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("maximum cardinality search visits every vertex once") {
  const Graph g = goldner_harary();
  auto order = maximum_cardinality_search(g, 7);
  CHECK(order.front() == 7);
  CHECK(make_set(order) == g.vertices());
  std::reverse(order.begin(), order.end());
  CHECK(is_perfect_elimination_ordering(g, order));
}
