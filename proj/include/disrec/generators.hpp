#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "disrec/graph.hpp"

namespace disrec {

enum class GenKind { stars, next_k, erdos_renyi, barabasi_albert };

GenKind parse_gen_kind(std::string_view name);
std::string to_string(GenKind kind);

struct GenSpec {
  GenKind kind = GenKind::erdos_renyi;
  std::size_t n_nodes = 0;
  std::size_t n_edges = 0;  // target; exact except for barabasi_albert
  std::uint64_t seed = 0;
};

// Hubs 0, 1, 2, ... each linked to every other node in turn; the last hub
// may be partial and takes its lowest-index non-neighbors first.
SparseGraph gen_stars(std::size_t n, std::size_t m);

// Ring lattice: every node joined to its K = m / n nearest neighbors on each
// side, the m mod n leftover edges placed at ring distance K + 1 starting
// from node 0.
SparseGraph gen_next_k(std::size_t n, std::size_t m);

// G(n, m): m distinct edges drawn uniformly without replacement.
SparseGraph gen_erdos_renyi(std::size_t n, std::size_t m, std::uint64_t seed);

// Preferential attachment with c = round(m_target / n) edges per arrival,
// grown from a (c+1)-clique. The edge count is n*c - c(c+1)/2, reported as-is.
SparseGraph gen_barabasi_albert(std::size_t n, std::size_t m_target, std::uint64_t seed);

SparseGraph generate(const GenSpec& spec);

}  // namespace disrec
