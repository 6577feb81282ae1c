#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace disrec {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  // Canonical orientation, smaller endpoint first.
  Edge normalized() const { return u <= v ? Edge{u, v} : Edge{v, u}; }

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Undirected simple graph in compressed adjacency form. Immutable once
// built; every mutating operation returns a new graph.
class SparseGraph {
 public:
  SparseGraph() : offsets_{0} {}

  std::size_t num_nodes() const { return offsets_.size() - 1; }
  std::size_t num_edges() const { return num_edges_; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {adjacency_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  bool has_edge(NodeId u, NodeId v) const;

  std::size_t max_degree() const;
  double average_degree() const;

  // Every edge once, as (u < v), in lexicographic order.
  std::vector<Edge> edges() const;

 private:
  friend SparseGraph from_sorted_unique(std::span<const Edge>, std::size_t);

  std::vector<std::size_t> offsets_;
  std::vector<NodeId> adjacency_;
  std::size_t num_edges_ = 0;
};

struct BuildReport {
  std::size_t input_pairs = 0;
  std::size_t duplicates_dropped = 0;
  std::size_t self_loops_dropped = 0;
};

// Symmetrizes, drops self-loops and parallel edges. Throws InputError naming
// the first pair that references a node >= n_nodes.
SparseGraph build_graph(std::span<const Edge> edges, std::size_t n_nodes,
                        BuildReport* report = nullptr);

// Fast path for edges that are already canonical (u < v), sorted and unique.
SparseGraph from_sorted_unique(std::span<const Edge> edges, std::size_t n_nodes);

struct Subgraph {
  SparseGraph graph;
  std::vector<NodeId> old_to_new;  // kNoNode for nodes that were dropped
  std::vector<NodeId> new_to_old;
};

// Component label per node. Labels are numbered in order of each
// component's smallest node index.
std::vector<std::uint32_t> component_labels(const SparseGraph& g,
                                            std::size_t* n_components = nullptr);
bool is_connected(const SparseGraph& g);

// Induced subgraph on `keep` (any order, no duplicates). New indices follow
// ascending old index.
Subgraph induced_subgraph(const SparseGraph& g, std::span<const NodeId> keep);

// Largest connected component. Equal-size components are resolved in favor
// of the one holding the smallest original index.
Subgraph extract_lcc(const SparseGraph& g);

// (degree, node count) pairs for every degree that occurs, ascending.
std::vector<std::pair<std::size_t, std::size_t>> degree_histogram(const SparseGraph& g);

struct Augmented {
  SparseGraph graph;
  std::size_t added = 0;
};

// Union with `new_edges`; already-present and repeated edges are ignored.
Augmented add_edges(const SparseGraph& g, std::span<const Edge> new_edges);

using UserId = std::uint32_t;
using ItemId = std::uint32_t;

struct Interaction {
  UserId user = 0;
  ItemId item = 0;

  friend auto operator<=>(const Interaction&, const Interaction&) = default;
};

// Users occupy [0, M), item i sits at node M + i.
struct CombinedGraph {
  SparseGraph base;
  std::size_t m_users = 0;
  std::size_t n_items = 0;

  NodeId item_node(ItemId i) const { return static_cast<NodeId>(m_users + i); }
};

CombinedGraph combine(const SparseGraph& social, std::span<const Interaction> positives,
                      std::size_t n_items);

}  // namespace disrec
