#include "disrec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <sstream>

#include "disrec/errors.hpp"
#include "disrec/rng.hpp"

namespace disrec {
namespace {

void multiply(const SparseGraph& g, const std::vector<double>& x, std::vector<double>& out) {
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    double s = 0.0;
    for (NodeId w : g.neighbors(v)) s += x[w];
    out[v] = s;
  }
}

// Power iteration on one connected graph.
SpectralResult iterate_connected(const SparseGraph& g, const PowerIterationOptions& opts) {
  const std::size_t n = g.num_nodes();
  SpectralResult r;
  if (n == 1) {
    r.z = {1.0};
    return r;
  }
  // (A + I) shares eigenvectors with A but moves the -lambda1 eigenvalue of
  // bipartite graphs off the dominant circle, so the iteration converges.
  std::vector<double> x(n, 1.0), ax(n);
  Rng restart_rng(derive_seed(opts.seed, "power-restart"));
  double residual = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    multiply(g, x, ax);
    double num = 0.0, den = 0.0, xmax = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      num += x[v] * ax[v];
      den += x[v] * x[v];
      xmax = std::max(xmax, x[v]);
    }
    const double lambda = num / den;
    residual = 0.0;
    for (std::size_t v = 0; v < n; ++v) residual = std::max(residual, std::abs(ax[v] - lambda * x[v]));
    residual /= lambda * xmax;
    if (residual <= opts.tol) {
      r.lambda1 = lambda;
      r.iterations = it;
      r.residual = residual;
      for (auto& v : x) v /= xmax;
      r.z = std::move(x);
      return r;
    }
    double ymax = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      ax[v] += x[v];
      ymax = std::max(ymax, ax[v]);
    }
    if (!(ymax > 0.0) || !std::isfinite(ymax)) {
      std::uniform_real_distribution<double> u(0.5, 1.0);
      for (auto& v : x) v = u(restart_rng);
      continue;
    }
    for (std::size_t v = 0; v < n; ++v) x[v] = ax[v] / ymax;
  }
  std::ostringstream msg;
  msg << "power iteration did not converge after " << opts.max_iter
      << " iterations (last residual " << residual << ", tol " << opts.tol << ")";
  throw NumericalError(msg.str(), residual);
}

void check_bounds(const SparseGraph& g, const SpectralResult& r, double tol) {
  const double dmax = static_cast<double>(g.max_degree());
  const double lower = std::max(std::sqrt(dmax), g.average_degree());
  const double slack = (tol + 1e-9) * std::max(1.0, dmax);
  if (r.lambda1 < lower - slack || r.lambda1 > dmax + slack) {
    std::ostringstream msg;
    msg << "eigenvalue " << r.lambda1 << " violates bounds [" << lower << ", " << dmax << "]";
    throw NumericalError(msg.str(), r.residual);
  }
}

}  // namespace

SpectralResult power_iteration(const SparseGraph& g, const PowerIterationOptions& opts) {
  const std::size_t n = g.num_nodes();
  if (n == 0) throw InputError("power_iteration: graph has no nodes");

  std::size_t n_comp = 0;
  auto label = component_labels(g, &n_comp);
  SpectralResult result;
  if (n_comp == 1) {
    result = iterate_connected(g, opts);
    check_bounds(g, result, opts.tol);
    return result;
  }

  struct Component {
    std::vector<NodeId> nodes;  // ascending, so nodes.front() is the minimum
    std::size_t max_degree = 0;
  };
  std::vector<Component> comps(n_comp);
  for (NodeId v = 0; v < n; ++v) {
    comps[label[v]].nodes.push_back(v);
    comps[label[v]].max_degree = std::max(comps[label[v]].max_degree, g.degree(v));
  }
  std::vector<std::size_t> order(n_comp);
  for (std::size_t c = 0; c < n_comp; ++c) order[c] = c;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return comps[a].max_degree > comps[b].max_degree;
  });

  // lambda(C) <= max degree of C, which prunes everything that cannot win.
  bool have_best = false;
  std::size_t best_comp = 0;
  SpectralResult best;
  for (std::size_t c : order) {
    const Component& comp = comps[c];
    const double cap = static_cast<double>(comp.max_degree);
    if (have_best && cap < best.lambda1 * (1.0 - opts.tol)) break;
    SpectralResult r;
    if (comp.nodes.size() == 1) {
      r.z = {1.0};
    } else {
      r = iterate_connected(induced_subgraph(g, comp.nodes).graph, opts);
    }
    const double margin = opts.tol * std::max(r.lambda1, best.lambda1);
    bool better = !have_best || r.lambda1 > best.lambda1 + margin ||
                  (std::abs(r.lambda1 - best.lambda1) <= margin &&
                   comp.nodes.front() < comps[best_comp].nodes.front());
    if (better) {
      best = std::move(r);
      best_comp = c;
      have_best = true;
    }
  }

  result.lambda1 = best.lambda1;
  result.iterations = best.iterations;
  result.residual = best.residual;
  result.connected = false;
  result.z.assign(n, 0.0);
  const auto& nodes = comps[best_comp].nodes;
  for (std::size_t k = 0; k < nodes.size(); ++k) result.z[nodes[k]] = best.z[k];
  check_bounds(g, result, opts.tol);
  return result;
}

DisseminationScores::DisseminationScores(SpectralResult spectral, std::size_t m_users,
                                         std::size_t n_items)
    : z_(std::move(spectral.z)), m_users_(m_users), n_items_(n_items), lambda1_(spectral.lambda1) {
  if (z_.size() != m_users + n_items) {
    throw InputError("dissemination scores: eigenvector length does not match M + N");
  }
}

DisseminationScores dissemination_scores(const CombinedGraph& cg, const PowerIterationOptions& opts) {
  return DisseminationScores(power_iteration(cg.base, opts), cg.m_users, cg.n_items);
}

std::vector<ScoredEdge> top_non_edges(const SparseGraph& g, std::span<const double> z,
                                      std::size_t count) {
  const std::size_t n = g.num_nodes();
  if (z.size() != n) throw InputError("top_non_edges: score vector length mismatch");
  std::vector<ScoredEdge> out;
  if (n < 2 || count == 0) return out;

  std::vector<NodeId> order(n);
  for (NodeId v = 0; v < n; ++v) order[v] = v;
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return z[a] > z[b]; });

  struct Frontier {
    double score;
    std::uint32_t p, q;  // positions in `order`, p < q
    bool operator<(const Frontier& o) const { return score < o.score; }
  };
  auto make = [&](std::uint32_t p, std::uint32_t q) {
    return Frontier{z[order[p]] * z[order[q]], p, q};
  };
  std::priority_queue<Frontier> heap;
  heap.push(make(0, 1));

  // Pairs of equal score are drained as one group, then emitted in
  // lexicographic order. Only the `need` smallest non-edges of the group are
  // kept (max-heap on Edge) so huge tie groups stay cheap in memory.
  while (out.size() < count && !heap.empty()) {
    const double s = heap.top().score;
    const std::size_t need = count - out.size();
    std::priority_queue<Edge> kept;
    while (!heap.empty() && heap.top().score == s) {
      auto [score, p, q] = heap.top();
      heap.pop();
      if (q + 1 < n) heap.push(make(p, q + 1));
      if (q == p + 1 && p + 2 < n) heap.push(make(p + 1, p + 2));
      Edge e = Edge{order[p], order[q]}.normalized();
      if (g.has_edge(e.u, e.v)) continue;
      if (kept.size() < need) {
        kept.push(e);
      } else if (e < kept.top()) {
        kept.pop();
        kept.push(e);
      }
    }
    std::vector<Edge> group;
    group.reserve(kept.size());
    while (!kept.empty()) {
      group.push_back(kept.top());
      kept.pop();
    }
    std::reverse(group.begin(), group.end());
    for (const Edge& e : group) out.push_back({e, s});
  }
  return out;
}

GellingSuggestion gelling_suggest(const SparseGraph& g, const GellingOptions& opts) {
  if (opts.k == 0) throw InputError("gelling: k must be at least 1");
  const std::size_t n = g.num_nodes();
  if (n < 2 || !is_connected(g)) throw InputError("gelling: graph must be connected (extract the LCC first)");
  const std::size_t all_pairs = n * (n - 1) / 2;
  const std::size_t available = all_pairs - g.num_edges();
  if (available == 0) throw InputError("gelling: graph is complete, no edge can be added");

  GellingSuggestion out;
  std::size_t k = opts.k;
  if (k > available) {
    out.warnings.push_back("gelling: requested " + std::to_string(k) + " edges but only " +
                           std::to_string(available) + " non-edges exist; truncated");
    k = available;
  }
  const std::size_t batch = std::max<std::size_t>(1, opts.batch);

  SparseGraph current = g;
  SpectralResult spec = power_iteration(current, opts.power);
  out.lambda_trace.emplace_back(0, spec.lambda1);
  while (out.edges.size() < k) {
    auto picked = top_non_edges(current, spec.z, std::min(batch, k - out.edges.size()));
    std::vector<Edge> edges;
    edges.reserve(picked.size());
    for (const auto& se : picked) edges.push_back(se.edge);
    out.edges.insert(out.edges.end(), picked.begin(), picked.end());
    current = add_edges(current, edges).graph;
    spec = power_iteration(current, opts.power);
    out.lambda_trace.emplace_back(out.edges.size(), spec.lambda1);
  }
  return out;
}

}  // namespace disrec
