#include "disrec/graph.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "disrec/errors.hpp"

namespace disrec {

bool SparseGraph::has_edge(NodeId u, NodeId v) const {
  if (u >= num_nodes() || v >= num_nodes()) return false;
  // search the shorter list
  if (degree(u) > degree(v)) std::swap(u, v);
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::size_t SparseGraph::max_degree() const {
  std::size_t best = 0;
  for (std::size_t v = 0; v < num_nodes(); ++v) best = std::max(best, degree(static_cast<NodeId>(v)));
  return best;
}

double SparseGraph::average_degree() const {
  if (num_nodes() == 0) return 0.0;
  return 2.0 * static_cast<double>(num_edges_) / static_cast<double>(num_nodes());
}

std::vector<Edge> SparseGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges_);
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) out.push_back({u, v});
    }
  }
  return out;
}

SparseGraph from_sorted_unique(std::span<const Edge> edges, std::size_t n_nodes) {
  SparseGraph g;
  g.offsets_.assign(n_nodes + 1, 0);
  for (const Edge& e : edges) {
    ++g.offsets_[e.u + 1];
    ++g.offsets_[e.v + 1];
  }
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
  g.adjacency_.resize(2 * edges.size());
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  // Lexicographic (u,v) order fills each list ascending: for node x, the
  // entries with x as v-endpoint come from smaller u's and precede those
  // with x as u-endpoint. Within each group the other endpoint ascends.
  for (const Edge& e : edges) g.adjacency_[cursor[e.v]++] = e.u;
  for (const Edge& e : edges) g.adjacency_[cursor[e.u]++] = e.v;
  g.num_edges_ = edges.size();
  return g;
}

SparseGraph build_graph(std::span<const Edge> edges, std::size_t n_nodes, BuildReport* report) {
  std::vector<Edge> canon;
  canon.reserve(edges.size());
  std::size_t self_loops = 0;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Edge& e = edges[k];
    if (e.u >= n_nodes || e.v >= n_nodes) {
      throw InputError("edge #" + std::to_string(k) + " (" + std::to_string(e.u) + "," +
                       std::to_string(e.v) + ") references a node outside [0," +
                       std::to_string(n_nodes) + ")");
    }
    if (e.u == e.v) {
      ++self_loops;
      continue;
    }
    canon.push_back(e.normalized());
  }
  std::sort(canon.begin(), canon.end());
  const std::size_t before = canon.size();
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());
  if (report) {
    report->input_pairs = edges.size();
    report->self_loops_dropped = self_loops;
    report->duplicates_dropped = before - canon.size();
  }
  return from_sorted_unique(canon, n_nodes);
}

std::vector<std::uint32_t> component_labels(const SparseGraph& g, std::size_t* n_components) {
  constexpr auto kUnset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> label(g.num_nodes(), kUnset);
  std::vector<NodeId> stack;
  std::uint32_t next = 0;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    if (label[s] != kUnset) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      for (NodeId w : g.neighbors(v)) {
        if (label[w] == kUnset) {
          label[w] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  if (n_components) *n_components = next;
  return label;
}

bool is_connected(const SparseGraph& g) {
  std::size_t count = 0;
  component_labels(g, &count);
  return count <= 1;
}

Subgraph induced_subgraph(const SparseGraph& g, std::span<const NodeId> keep) {
  Subgraph sub;
  sub.old_to_new.assign(g.num_nodes(), kNoNode);
  sub.new_to_old.assign(keep.begin(), keep.end());
  std::sort(sub.new_to_old.begin(), sub.new_to_old.end());
  for (std::size_t k = 0; k < sub.new_to_old.size(); ++k) {
    sub.old_to_new[sub.new_to_old[k]] = static_cast<NodeId>(k);
  }
  std::vector<Edge> edges;
  for (NodeId nu = 0; nu < sub.new_to_old.size(); ++nu) {
    for (NodeId w : g.neighbors(sub.new_to_old[nu])) {
      NodeId nw = sub.old_to_new[w];
      if (nw != kNoNode && nu < nw) edges.push_back({nu, nw});
    }
  }
  // old->new is monotone, so edges come out already sorted
  sub.graph = from_sorted_unique(edges, sub.new_to_old.size());
  return sub;
}

Subgraph extract_lcc(const SparseGraph& g) {
  if (g.num_nodes() == 0) throw InputError("extract_lcc: graph has no nodes");
  std::size_t n_comp = 0;
  auto label = component_labels(g, &n_comp);
  std::vector<std::size_t> size(n_comp, 0);
  for (auto l : label) ++size[l];
  // labels follow smallest member index, so the first maximum wins ties
  auto best = static_cast<std::uint32_t>(std::max_element(size.begin(), size.end()) - size.begin());
  std::vector<NodeId> keep;
  keep.reserve(size[best]);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (label[v] == best) keep.push_back(v);
  }
  return induced_subgraph(g, keep);
}

std::vector<std::pair<std::size_t, std::size_t>> degree_histogram(const SparseGraph& g) {
  std::vector<std::size_t> counts(g.max_degree() + 1, 0);
  for (NodeId v = 0; v < g.num_nodes(); ++v) ++counts[g.degree(v)];
  std::vector<std::pair<std::size_t, std::size_t>> hist;
  for (std::size_t d = 0; d < counts.size(); ++d) {
    if (counts[d] > 0 && g.num_nodes() > 0) hist.emplace_back(d, counts[d]);
  }
  return hist;
}

Augmented add_edges(const SparseGraph& g, std::span<const Edge> new_edges) {
  std::vector<Edge> merged = g.edges();
  const std::size_t before = merged.size();
  merged.insert(merged.end(), new_edges.begin(), new_edges.end());
  BuildReport report;
  Augmented out;
  out.graph = build_graph(merged, g.num_nodes(), &report);
  out.added = out.graph.num_edges() - before;
  return out;
}

CombinedGraph combine(const SparseGraph& social, std::span<const Interaction> positives,
                      std::size_t n_items) {
  const std::size_t m = social.num_nodes();
  std::vector<Edge> edges = social.edges();
  edges.reserve(edges.size() + positives.size());
  for (std::size_t k = 0; k < positives.size(); ++k) {
    const auto& p = positives[k];
    if (p.user >= m || p.item >= n_items) {
      throw InputError("interaction #" + std::to_string(k) + " (user " + std::to_string(p.user) +
                       ", item " + std::to_string(p.item) + ") is out of range");
    }
    edges.push_back({p.user, static_cast<NodeId>(m + p.item)});
  }
  CombinedGraph cg;
  cg.base = build_graph(edges, m + n_items);
  cg.m_users = m;
  cg.n_items = n_items;
  return cg;
}

}  // namespace disrec
