#include "disrec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "disrec/errors.hpp"
#include "disrec/rng.hpp"

namespace disrec {

namespace {

std::vector<Candidate> candidates_for(const SplitDataset& data, const Partition& held_out,
                                      const EvalProtocol& protocol, const char* stream) {
  const Partition* observed[] = {&data.train, &data.validation, &data.test};
  NegativeSampler sampler(observed, data.n_users, data.n_items);
  std::vector<Candidate> out;
  out.reserve(held_out.size());
  for (UserId u = 0; u < data.n_users; ++u) {
    auto items = held_out.items_of(u);
    if (items.empty()) continue;
    Rng rng(derive_seed(protocol.seed, stream, u));
    for (ItemId i : items) {
      out.push_back({u, i, sampler.draw_distinct(u, protocol.neg_per_positive, rng)});
    }
  }
  return out;
}

}  // namespace

std::vector<Candidate> build_candidates(const SplitDataset& data, const EvalProtocol& protocol) {
  data.test.require(Split::test, "build_candidates");
  return candidates_for(data, data.test, protocol, "eval");
}

std::vector<UserId> pick_eval_users(const SplitDataset& data, const EvalProtocol& protocol) {
  std::vector<UserId> pool;
  for (UserId u = 0; u < data.n_users; ++u) {
    if (!data.test.items_of(u).empty()) pool.push_back(u);
  }
  if (pool.size() > protocol.n_eval_users) {
    Rng rng(derive_seed(protocol.seed, "eval-users"));
    for (std::size_t k = 0; k < protocol.n_eval_users; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
      std::swap(pool[k], pool[pick(rng)]);
    }
    pool.resize(protocol.n_eval_users);
    std::sort(pool.begin(), pool.end());
  }
  return pool;
}

std::size_t rank_of_positive(const Scorer& score, const Candidate& c) {
  const double pos = score(c.user, c.positive);
  std::size_t rank = 1;
  for (ItemId j : c.negatives) {
    const double s = score(c.user, j);
    if (s > pos || (s == pos && j < c.positive)) ++rank;
  }
  return rank;
}

namespace {

template <typename Gain>
double average_per_user(std::span<const std::vector<std::size_t>> ranks_per_user, Gain gain) {
  double total = 0.0;
  std::size_t users = 0;
  for (const auto& ranks : ranks_per_user) {
    if (ranks.empty()) continue;
    double mine = 0.0;
    for (std::size_t r : ranks) mine += gain(r);
    total += mine / static_cast<double>(ranks.size());
    ++users;
  }
  return users == 0 ? 0.0 : total / static_cast<double>(users);
}

}  // namespace

double hit_ratio(std::span<const std::vector<std::size_t>> ranks_per_user, std::size_t top_n) {
  return average_per_user(ranks_per_user, [&](std::size_t r) { return r <= top_n ? 1.0 : 0.0; });
}

double ndcg(std::span<const std::vector<std::size_t>> ranks_per_user, std::size_t top_n) {
  return average_per_user(ranks_per_user, [&](std::size_t r) {
    return r <= top_n ? 1.0 / std::log2(static_cast<double>(r) + 1.0) : 0.0;
  });
}

Metrics evaluate(const Scorer& score, std::span<const Candidate> candidates,
                 std::span<const UserId> users, std::size_t top_n) {
  if (top_n == 0) throw InputError("evaluate: top_n must be >= 1");
  std::vector<UserId> wanted(users.begin(), users.end());
  std::sort(wanted.begin(), wanted.end());
  std::vector<std::vector<std::size_t>> ranks(wanted.size());
  Metrics m;
  for (const Candidate& c : candidates) {
    auto it = std::lower_bound(wanted.begin(), wanted.end(), c.user);
    if (it == wanted.end() || *it != c.user) continue;
    if (c.negatives.size() + 1 < top_n) {
      throw InputError("evaluate: user " + std::to_string(c.user) + " has a candidate list of " +
                       std::to_string(c.negatives.size() + 1) + " items, fewer than N=" +
                       std::to_string(top_n));
    }
    ranks[static_cast<std::size_t>(it - wanted.begin())].push_back(rank_of_positive(score, c));
    ++m.positives;
  }
  for (const auto& r : ranks) m.users += r.empty() ? 0 : 1;
  m.hr = hit_ratio(ranks, top_n);
  m.ndcg = ndcg(ranks, top_n);
  return m;
}

AugmentResult augment_graph(const Scorer& score, std::span<const Candidate> candidates,
                            const SparseGraph& social, std::size_t n_items, double threshold,
                            const PowerIterationOptions& power) {
  const std::size_t m = social.num_nodes();
  std::vector<char> in_test(m, 0);
  for (const Candidate& c : candidates) {
    if (c.user >= m) throw InputError("augment_graph: candidate user outside the social graph");
    in_test[c.user] = 1;
  }
  std::vector<Edge> base;
  for (const Edge& e : social.edges()) {
    if (in_test[e.u] && in_test[e.v]) base.push_back(e);
  }
  AugmentResult out;
  const SparseGraph restricted = from_sorted_unique(base, m + n_items);
  out.lambda1_before = power_iteration(restricted, power).lambda1;

  std::vector<Edge> accepted;
  auto consider = [&](UserId a, ItemId i) {
    if (i >= n_items) throw InputError("augment_graph: item index out of range");
    if (score(a, i) > threshold) accepted.push_back({a, static_cast<NodeId>(m + i)});
  };
  for (const Candidate& c : candidates) {
    consider(c.user, c.positive);
    for (ItemId j : c.negatives) consider(c.user, j);
  }
  auto aug = add_edges(restricted, accepted);
  out.graph = std::move(aug.graph);
  out.edges_added = aug.added;
  out.lambda1_after = power_iteration(out.graph, power).lambda1;
  return out;
}

EvalReport evaluate_model(const DiffNet& model, const SplitDataset& data,
                          const EvalProtocol& protocol, double threshold) {
  const ScoreTable table = model.scores();
  Scorer scorer = [&table](UserId a, ItemId i) { return table(a, i); };
  const auto candidates = build_candidates(data, protocol);
  const auto users = pick_eval_users(data, protocol);
  EvalReport report;
  report.metrics = evaluate(scorer, candidates, users, protocol.top_n);
  report.augment = augment_graph(scorer, candidates, model.social(), data.n_items, threshold);
  return report;
}

Metrics validation_metrics(const DiffNet& model, const SplitDataset& data,
                           const EvalProtocol& protocol) {
  data.validation.require(Split::validation, "validation_metrics");
  const ScoreTable table = model.scores();
  Scorer scorer = [&table](UserId a, ItemId i) { return table(a, i); };
  const auto candidates = candidates_for(data, data.validation, protocol, "validation");
  std::vector<UserId> users;
  for (UserId u = 0; u < data.n_users; ++u) {
    if (!data.validation.items_of(u).empty()) users.push_back(u);
  }
  return evaluate(scorer, candidates, users, protocol.top_n);
}

std::vector<ParetoPoint> pareto_sweep(const SparseGraph& social, const FeatureSet& features,
                                      const SplitDataset& data, const HyperParams& base,
                                      std::span<const Alpha> alphas, const EvalProtocol& protocol,
                                      const ParetoHook& hook) {
  std::vector<ParetoPoint> points;
  TrainingData td{social, features, data.train, data.n_items};
  for (const Alpha& alpha : alphas) {
    HyperParams hp = base;
    hp.alpha = alpha;
    TrainResult tr = train(td, hp);
    const EvalReport report = evaluate_model(tr.model, data, protocol);
    points.push_back({alpha, report.augment.edges_added, report.metrics.hr, report.metrics.ndcg,
                      report.augment.lambda1_after});
    if (hook) hook(alpha, tr);
  }
  return points;
}

std::string pareto_csv(std::span<const ParetoPoint> points, const std::string& manifest_id) {
  std::ostringstream os;
  os.precision(10);
  os << "# manifest " << manifest_id << "\n";
  os << "alpha,edges_added,hr,ndcg,lambda1\n";
  for (const auto& p : points) {
    os << p.alpha.to_string() << ',' << p.edges_added << ',' << p.hr << ',' << p.ndcg << ','
       << p.lambda1_augmented << '\n';
  }
  return os.str();
}

}  // namespace disrec
