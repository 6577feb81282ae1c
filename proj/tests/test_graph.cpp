#include "doctest.h"

#include <random>

#include "disrec/errors.hpp"
#include "disrec/graph.hpp"
#include "disrec/io.hpp"
#include "support/oracles.hpp"

using namespace disrec;

namespace {

void check_valid(const SparseGraph& g) {
  std::size_t degree_sum = 0;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    auto nb = g.neighbors(u);
    degree_sum += nb.size();
    for (std::size_t k = 0; k < nb.size(); ++k) {
      REQUIRE(nb[k] != u);
      if (k > 0) REQUIRE(nb[k - 1] < nb[k]);
      REQUIRE(g.has_edge(nb[k], u));
    }
  }
  REQUIRE(degree_sum == 2 * g.num_edges());
}

std::vector<Edge> random_pairs(std::size_t n, std::size_t count, std::mt19937_64& rng) {
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  std::vector<Edge> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back({pick(rng), pick(rng)});
  return out;
}

}  // namespace

TEST_CASE("build_graph drops duplicates and self loops") {
  std::vector<Edge> in{{0, 1}, {1, 0}, {1, 1}, {1, 2}};
  BuildReport rep;
  SparseGraph g = build_graph(in, 3, &rep);
  CHECK(g.num_edges() == 2);
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(2, 1));
  CHECK_FALSE(g.has_edge(0, 2));
  CHECK(rep.duplicates_dropped == 1);
  CHECK(rep.self_loops_dropped == 1);
  check_valid(g);
}

TEST_CASE("empty edge list gives isolated nodes") {
  SparseGraph g = build_graph({}, 5);
  CHECK(g.num_nodes() == 5);
  CHECK(g.num_edges() == 0);
  CHECK(g.max_degree() == 0);
}

TEST_CASE("out of range pair is reported") {
  std::vector<Edge> in{{0, 1}, {2, 7}};
  try {
    build_graph(in, 3);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("(2,7)") != std::string::npos);
  }
}

TEST_CASE("property: random multigraphs build into valid simple graphs, order independent") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    auto pairs = random_pairs(n, rng() % 200, rng);
    SparseGraph g = build_graph(pairs, n);
    check_valid(g);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    for (auto& e : pairs) e = Edge{e.v, e.u};
    SparseGraph h = build_graph(pairs, n);
    CHECK(g.edges() == h.edges());
    // edge list round trip
    const auto edges = g.edges();
    LoadedGraph back = parse_edge_list(format_edge_list(edges));
    std::vector<Edge> remapped;
    for (const auto& e : back.graph.edges()) {
      remapped.push_back(Edge{static_cast<NodeId>(back.original_ids[e.u]),
                              static_cast<NodeId>(back.original_ids[e.v])}
                             .normalized());
    }
    std::sort(remapped.begin(), remapped.end());
    CHECK(remapped == edges);
  }
}

TEST_CASE("extract_lcc tie goes to the smallest minimum index") {
  // two triangles and an isolated node; the second triangle holds node 0
  std::vector<Edge> in{{1, 2}, {2, 3}, {1, 3}, {0, 4}, {4, 5}, {0, 5}};
  Subgraph lcc = extract_lcc(build_graph(in, 7));
  CHECK(lcc.graph.num_nodes() == 3);
  CHECK(lcc.new_to_old == std::vector<NodeId>{0, 4, 5});
  CHECK(lcc.old_to_new[1] == kNoNode);
  CHECK(is_connected(lcc.graph));
}

TEST_CASE("extract_lcc picks the path over the single edge") {
  std::vector<Edge> in{{0, 1}, {1, 2}, {2, 3}, {4, 5}};
  Subgraph lcc = extract_lcc(build_graph(in, 6));
  CHECK(lcc.graph.num_nodes() == 4);
  CHECK(lcc.graph.num_edges() == 3);
}

TEST_CASE("extract_lcc on an empty graph throws") {
  CHECK_THROWS_AS(extract_lcc(SparseGraph{}), InputError);
}

TEST_CASE("property: extract_lcc is idempotent and maximal") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng() % 60;
    SparseGraph g = oracle::bernoulli_graph(n, 1.5 / n, rng);
    Subgraph once = extract_lcc(g);
    Subgraph twice = extract_lcc(once.graph);
    CHECK(is_connected(once.graph));
    CHECK(twice.graph.edges() == once.graph.edges());
    std::size_t count = 0;
    auto labels = component_labels(g, &count);
    std::vector<std::size_t> sizes(count, 0);
    for (auto l : labels) ++sizes[l];
    CHECK(once.graph.num_nodes() == *std::max_element(sizes.begin(), sizes.end()));
    // relabelled edges exist in the original graph
    for (const auto& e : once.graph.edges()) CHECK(g.has_edge(once.new_to_old[e.u], once.new_to_old[e.v]));
  }
}

TEST_CASE("degree histogram") {
  SparseGraph star = build_graph(std::vector<Edge>{{0, 1}, {0, 2}, {0, 3}, {0, 4}}, 5);
  using H = std::vector<std::pair<std::size_t, std::size_t>>;
  CHECK(degree_histogram(star) == H{{1, 4}, {4, 1}});
  std::vector<Edge> c6;
  for (NodeId v = 0; v < 6; ++v) c6.push_back({v, static_cast<NodeId>((v + 1) % 6)});
  CHECK(degree_histogram(build_graph(c6, 6)) == H{{2, 6}});
}

TEST_CASE("property: histogram mean equals 2m/n") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng() % 80;
    SparseGraph g = oracle::bernoulli_graph(n, 0.1, rng);
    std::size_t nodes = 0, total = 0;
    for (auto [d, c] : degree_histogram(g)) {
      nodes += c;
      total += d * c;
    }
    CHECK(nodes == n);
    CHECK(total == 2 * g.num_edges());
    CHECK(g.average_degree() == doctest::Approx(2.0 * g.num_edges() / n));
  }
}

TEST_CASE("combine builds the user-item adjacency") {
  SparseGraph social = build_graph(std::vector<Edge>{{0, 1}}, 2);
  std::vector<Interaction> pos{{0, 0}, {1, 1}};
  CombinedGraph cg = combine(social, pos, 2);
  CHECK(cg.base.num_nodes() == 4);
  CHECK(cg.base.edges() == std::vector<Edge>{{0, 1}, {0, 2}, {1, 3}});

  CombinedGraph empty = combine(social, {}, 3);
  CHECK(empty.base.num_nodes() == 5);
  CHECK(empty.base.num_edges() == 1);

  std::vector<Interaction> bad{{0, 5}};
  CHECK_THROWS_AS(combine(social, bad, 2), InputError);
}

TEST_CASE("property: combined graph has no item-item edges") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + rng() % 20, n = 1 + rng() % 20;
    SparseGraph social = oracle::bernoulli_graph(m, 0.2, rng);
    std::vector<Interaction> pos;
    for (UserId u = 0; u < m; ++u) {
      for (ItemId i = 0; i < n; ++i) {
        if (rng() % 4 == 0) pos.push_back({u, i});
      }
    }
    CombinedGraph cg = combine(social, pos, n);
    for (const auto& e : cg.base.edges()) CHECK(e.u < m);
    CHECK(cg.base.num_edges() == social.num_edges() + pos.size());
    for (const auto& p : pos) CHECK(cg.base.has_edge(p.user, cg.item_node(p.item)));
  }
}

TEST_CASE("add_edges") {
  std::vector<Edge> c4{{0, 1}, {1, 2}, {2, 3}, {0, 3}};
  SparseGraph g = build_graph(c4, 4);
  std::vector<Edge> chord{{2, 0}};
  Augmented a = add_edges(g, chord);
  CHECK(a.added == 1);
  CHECK(a.graph.num_edges() == 5);
  std::vector<Edge> existing{{1, 0}, {0, 1}};
  Augmented b = add_edges(g, existing);
  CHECK(b.added == 0);
  CHECK(b.graph.edges() == g.edges());
}
