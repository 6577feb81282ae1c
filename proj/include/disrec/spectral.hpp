#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "disrec/graph.hpp"

namespace disrec {

struct PowerIterationOptions {
  double tol = 1e-8;
  std::size_t max_iter = 10000;
  std::uint64_t seed = 0;  // only consulted for a restart after numerical collapse
};

// Leading eigenpair of the adjacency matrix.
//
// `z` is scaled to unit infinity norm and is non-negative. On a disconnected
// graph the pair belongs to the dominant component (largest eigenvalue,
// ties to the component holding the smallest node index), `z` is exactly
// zero elsewhere and `connected` is false.
struct SpectralResult {
  double lambda1 = 0.0;
  std::vector<double> z;
  std::size_t iterations = 0;
  double residual = 0.0;  // ||A z - lambda1 z||_inf / lambda1
  bool connected = true;
};

// Shifted power iteration on (A + I), started from the all-ones vector.
// Throws NumericalError (carrying the last residual) when max_iter is hit.
SpectralResult power_iteration(const SparseGraph& g, const PowerIterationOptions& opts = {});

// lambda(a, i) = z[a] * z[M + i] over the combined user-item graph.
class DisseminationScores {
 public:
  DisseminationScores() = default;
  DisseminationScores(SpectralResult spectral, std::size_t m_users, std::size_t n_items);

  double operator()(UserId a, ItemId i) const { return z_[a] * z_[m_users_ + i]; }
  double user_entry(UserId a) const { return z_[a]; }
  double item_entry(ItemId i) const { return z_[m_users_ + i]; }

  std::size_t m_users() const { return m_users_; }
  std::size_t n_items() const { return n_items_; }
  double lambda1() const { return lambda1_; }

 private:
  std::vector<double> z_;
  std::size_t m_users_ = 0;
  std::size_t n_items_ = 0;
  double lambda1_ = 0.0;
};

DisseminationScores dissemination_scores(const CombinedGraph& cg,
                                         const PowerIterationOptions& opts = {});

struct ScoredEdge {
  Edge edge;
  double score = 0.0;
};

// The `count` non-edges with the largest z[i]*z[j], best first; equal scores
// ordered by (min endpoint, max endpoint). Output is identical to scoring
// every pair and sorting, but walks a max-heap frontier over nodes sorted by
// z so only the head of the ranking is touched.
std::vector<ScoredEdge> top_non_edges(const SparseGraph& g, std::span<const double> z,
                                      std::size_t count);

struct GellingOptions {
  std::size_t k = 1;
  std::size_t batch = 1000;  // suggestions taken per eigenvector recomputation
  PowerIterationOptions power;
};

struct GellingSuggestion {
  std::vector<ScoredEdge> edges;
  // (edges added so far, lambda1) at the start and after every batch
  std::vector<std::pair<std::size_t, double>> lambda_trace;
  std::vector<std::string> warnings;
};

// Greedy eigenvalue-driven edge addition. Requires a connected graph.
GellingSuggestion gelling_suggest(const SparseGraph& g, const GellingOptions& opts);

}  // namespace disrec
