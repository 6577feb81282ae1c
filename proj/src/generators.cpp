#include "disrec/generators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

#include "disrec/errors.hpp"
#include "disrec/rng.hpp"

namespace disrec {
namespace {

void check_feasible(const char* who, std::size_t n, std::size_t m) {
  if (n < 2) throw InputError(std::string(who) + ": need at least 2 nodes");
  const std::size_t cap = n * (n - 1) / 2;
  if (m > cap) {
    throw InputError(std::string(who) + ": " + std::to_string(m) + " edges do not fit in " +
                     std::to_string(n) + " nodes (max " + std::to_string(cap) + ")");
  }
}

}  // namespace

GenKind parse_gen_kind(std::string_view name) {
  if (name == "stars") return GenKind::stars;
  if (name == "next_k" || name == "next-k") return GenKind::next_k;
  if (name == "erdos_renyi" || name == "er") return GenKind::erdos_renyi;
  if (name == "barabasi_albert" || name == "ba") return GenKind::barabasi_albert;
  throw InputError("unknown generator kind '" + std::string(name) + "'");
}

std::string to_string(GenKind kind) {
  switch (kind) {
    case GenKind::stars: return "stars";
    case GenKind::next_k: return "next_k";
    case GenKind::erdos_renyi: return "erdos_renyi";
    case GenKind::barabasi_albert: return "barabasi_albert";
  }
  return "?";
}

SparseGraph gen_stars(std::size_t n, std::size_t m) {
  check_feasible("stars", n, m);
  std::vector<Edge> edges;
  edges.reserve(m);
  for (NodeId hub = 0; edges.size() < m; ++hub) {
    for (NodeId v = hub + 1; v < n && edges.size() < m; ++v) edges.push_back({hub, v});
  }
  return from_sorted_unique(edges, n);
}

SparseGraph gen_next_k(std::size_t n, std::size_t m) {
  check_feasible("next_k", n, m);
  std::vector<Edge> edges;
  edges.reserve(m);
  // Distance d contributes n edges, except d = n/2 on an even ring (n/2).
  for (std::size_t d = 1; edges.size() < m; ++d) {
    const std::size_t layer = (2 * d == n) ? n / 2 : n;
    const std::size_t take = std::min(layer, m - edges.size());
    for (std::size_t i = 0; i < take; ++i) {
      edges.push_back(Edge{static_cast<NodeId>(i), static_cast<NodeId>((i + d) % n)}.normalized());
    }
  }
  std::sort(edges.begin(), edges.end());
  return from_sorted_unique(edges, n);
}

SparseGraph gen_erdos_renyi(std::size_t n, std::size_t m, std::uint64_t seed) {
  check_feasible("erdos_renyi", n, m);
  Rng rng(derive_seed(seed, "erdos_renyi"));
  const std::size_t all = n * (n - 1) / 2;
  // Dense requests sample the excluded set instead.
  const bool complement = m > all / 2;
  const std::size_t draws = complement ? all - m : m;
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(draws * 2);
  std::vector<Edge> edges;
  edges.reserve(m);
  while (chosen.size() < draws) {
    NodeId u = pick(rng), v = pick(rng);
    if (u == v) continue;
    Edge e = Edge{u, v}.normalized();
    if (chosen.insert(std::uint64_t{e.u} * n + e.v).second && !complement) edges.push_back(e);
  }
  if (complement) {
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (!chosen.count(std::uint64_t{u} * n + v)) edges.push_back({u, v});
      }
    }
  }
  std::sort(edges.begin(), edges.end());
  return from_sorted_unique(edges, n);
}

SparseGraph gen_barabasi_albert(std::size_t n, std::size_t m_target, std::uint64_t seed) {
  if (n < 3) throw InputError("barabasi_albert: need at least 3 nodes");
  const auto c = static_cast<std::size_t>(std::llround(static_cast<double>(m_target) / static_cast<double>(n)));
  if (c < 1) throw InputError("barabasi_albert: attachment parameter round(m/n) is below 1");
  if (c + 1 > n) throw InputError("barabasi_albert: seed clique larger than the graph");

  Rng rng(derive_seed(seed, "barabasi_albert"));
  std::vector<Edge> edges;
  // every node appears once per incident edge, so uniform draws are degree-biased
  std::vector<NodeId> stubs;
  for (NodeId u = 0; u <= c; ++u) {
    for (NodeId v = u + 1; v <= c; ++v) {
      edges.push_back({u, v});
      stubs.push_back(u);
      stubs.push_back(v);
    }
  }
  std::vector<NodeId> targets;
  for (auto v = static_cast<NodeId>(c + 1); v < n; ++v) {
    targets.clear();
    std::uniform_int_distribution<std::size_t> pick(0, stubs.size() - 1);
    while (targets.size() < c) {
      NodeId t = stubs[pick(rng)];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (NodeId t : targets) {
      edges.push_back({t, v});
      stubs.push_back(t);
      stubs.push_back(v);
    }
  }
  std::sort(edges.begin(), edges.end());
  return from_sorted_unique(edges, n);
}

SparseGraph generate(const GenSpec& spec) {
  switch (spec.kind) {
    case GenKind::stars: return gen_stars(spec.n_nodes, spec.n_edges);
    case GenKind::next_k: return gen_next_k(spec.n_nodes, spec.n_edges);
    case GenKind::erdos_renyi: return gen_erdos_renyi(spec.n_nodes, spec.n_edges, spec.seed);
    case GenKind::barabasi_albert: return gen_barabasi_albert(spec.n_nodes, spec.n_edges, spec.seed);
  }
  throw InputError("unknown generator kind");
}

}  // namespace disrec
