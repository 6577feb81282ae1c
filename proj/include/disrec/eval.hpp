#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "disrec/diffnet.hpp"
#include "disrec/graph.hpp"
#include "disrec/interactions.hpp"

namespace disrec {

struct EvalProtocol {
  std::size_t n_eval_users = 1000;
  std::size_t neg_per_positive = 99;
  std::size_t top_n = 10;
  std::uint64_t seed = 0;
};

using Scorer = std::function<double(UserId, ItemId)>;

// One held-out positive and the negatives it is ranked against.
struct Candidate {
  UserId user = 0;
  ItemId positive = 0;
  std::vector<ItemId> negatives;
};

// Candidate lists for every test positive of every test user. Negatives are
// distinct items the user has no positive for in any partition; each user
// draws from its own substream, so lists do not depend on which users are
// later evaluated.
std::vector<Candidate> build_candidates(const SplitDataset& data, const EvalProtocol& protocol);

// Up to n_eval_users distinct users having test positives, ascending.
std::vector<UserId> pick_eval_users(const SplitDataset& data, const EvalProtocol& protocol);

// 1-based rank of the positive; candidates sorted by score descending, ties
// by ascending item index.
std::size_t rank_of_positive(const Scorer& score, const Candidate& c);

// Ranks grouped per user. Both metrics average over a user's positives
// first, then over users.
double hit_ratio(std::span<const std::vector<std::size_t>> ranks_per_user, std::size_t top_n);
double ndcg(std::span<const std::vector<std::size_t>> ranks_per_user, std::size_t top_n);

struct Metrics {
  double hr = 0.0;
  double ndcg = 0.0;
  std::size_t users = 0;
  std::size_t positives = 0;
};

// Throws InputError if any candidate list is shorter than top_n.
Metrics evaluate(const Scorer& score, std::span<const Candidate> candidates,
                 std::span<const UserId> users, std::size_t top_n);

struct AugmentResult {
  SparseGraph graph;  // over M + N nodes, item i at M + i
  std::size_t edges_added = 0;
  double lambda1_before = 0.0;
  double lambda1_after = 0.0;
};

// Social edges among test users, plus an edge (a, M + i) for every candidate
// pair scoring above `threshold`.
AugmentResult augment_graph(const Scorer& score, std::span<const Candidate> candidates,
                            const SparseGraph& social, std::size_t n_items,
                            double threshold = 0.5, const PowerIterationOptions& power = {});

struct EvalReport {
  Metrics metrics;
  AugmentResult augment;
};

EvalReport evaluate_model(const DiffNet& model, const SplitDataset& data,
                          const EvalProtocol& protocol, double threshold = 0.5);

// Same protocol over the validation partition, for the training log.
Metrics validation_metrics(const DiffNet& model, const SplitDataset& data,
                           const EvalProtocol& protocol);

struct ParetoPoint {
  Alpha alpha = Alpha::neg_inf();
  std::size_t edges_added = 0;
  double hr = 0.0;
  double ndcg = 0.0;
  double lambda1_augmented = 0.0;
};

// Called with each trained model, e.g. to write a checkpoint.
using ParetoHook = std::function<void(Alpha, const TrainResult&)>;

// One independently trained model per alpha, all from the same seed.
std::vector<ParetoPoint> pareto_sweep(const SparseGraph& social, const FeatureSet& features,
                                      const SplitDataset& data, const HyperParams& base,
                                      std::span<const Alpha> alphas, const EvalProtocol& protocol,
                                      const ParetoHook& hook = {});

std::string pareto_csv(std::span<const ParetoPoint> points, const std::string& manifest_id);

}  // namespace disrec
