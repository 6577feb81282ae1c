#include "disrec/sis.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <thread>

#include "disrec/errors.hpp"
#include "disrec/rng.hpp"

namespace disrec {

void SisConfig::validate() const {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw InputError("sis: tau must be >= 0");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InputError("sis: gamma must be > 0");
  if (!(rho > 0.0 && rho <= 1.0)) throw InputError("sis: rho must lie in (0, 1]");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw InputError("sis: t_max must be > 0");
  if (!(sample_dt > 0.0)) throw InputError("sis: sample_dt must be > 0");
  if (n_runs == 0) throw InputError("sis: n_runs must be >= 1");
}

namespace {

struct Event {
  double time;
  std::uint64_t seq;  // insertion order breaks time ties deterministically
  NodeId node;        // recovering node, or transmission source
  NodeId target;      // kNoNode for a recovery
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    return a.time != b.time ? a.time > b.time : a.seq > b.seq;
  }
};

class SisRun {
 public:
  SisRun(const SparseGraph& g, const SisConfig& cfg, std::uint64_t seed)
      : g_(g), cfg_(cfg), rng_(seed), infected_(g.num_nodes(), 0),
        recovery_(g.num_nodes(), 0.0) {}

  // Infected count at every sample time.
  std::vector<std::size_t> run(const std::vector<double>& times) {
    const std::size_t n = g_.num_nodes();
    const auto k = static_cast<std::size_t>(std::ceil(cfg_.rho * static_cast<double>(n) - 1e-12));
    std::vector<NodeId> nodes(n);
    for (NodeId v = 0; v < n; ++v) nodes[v] = v;
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(nodes[i], nodes[pick(rng_)]);
      infect(nodes[i], 0.0);
    }

    std::vector<std::size_t> samples;
    samples.reserve(times.size());
    while (!events_.empty()) {
      Event ev = events_.top();
      if (ev.time > cfg_.t_max) break;
      events_.pop();
      while (samples.size() < times.size() && times[samples.size()] < ev.time) samples.push_back(count_);
      if (ev.target == kNoNode) {
        infected_[ev.node] = 0;
        --count_;
      } else {
        if (!infected_[ev.target]) infect(ev.target, ev.time);
        schedule_transmission(ev.node, ev.target, ev.time);
      }
    }
    while (samples.size() < times.size()) samples.push_back(count_);
    return samples;
  }

 private:
  void infect(NodeId v, double t) {
    infected_[v] = 1;
    ++count_;
    std::exponential_distribution<double> rec(cfg_.gamma);
    recovery_[v] = t + rec(rng_);
    push(recovery_[v], v, kNoNode);
    for (NodeId w : g_.neighbors(v)) schedule_transmission(v, w, t);
  }

  // Next firing of the Poisson contact process on v -> w, kept only while v
  // is still infected.
  void schedule_transmission(NodeId v, NodeId w, double t) {
    if (cfg_.tau <= 0.0) return;
    std::exponential_distribution<double> contact(cfg_.tau);
    double next = t + contact(rng_);
    if (next < recovery_[v] && next <= cfg_.t_max) push(next, v, w);
  }

  void push(double t, NodeId node, NodeId target) { events_.push(Event{t, seq_++, node, target}); }

  const SparseGraph& g_;
  const SisConfig& cfg_;
  Rng rng_;
  std::vector<char> infected_;
  std::vector<double> recovery_;
  std::priority_queue<Event, std::vector<Event>, Later> events_;
  std::uint64_t seq_ = 0;
  std::size_t count_ = 0;
};

}  // namespace

SisTrace simulate_sis(const SparseGraph& g, const SisConfig& cfg, unsigned threads) {
  cfg.validate();
  if (g.num_nodes() == 0) throw InputError("sis: graph has no nodes");

  SisTrace trace;
  const auto n_samples = static_cast<std::size_t>(std::floor(cfg.t_max / cfg.sample_dt + 1e-9)) + 1;
  trace.times.resize(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) trace.times[k] = static_cast<double>(k) * cfg.sample_dt;

  std::vector<std::vector<std::size_t>> counts(cfg.n_runs);
  auto worker = [&](std::size_t first, std::size_t stride) {
    for (std::size_t r = first; r < cfg.n_runs; r += stride) {
      SisRun run(g, cfg, derive_seed(cfg.seed, "sis", r));
      counts[r] = run.run(trace.times);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cfg.n_runs)));
  if (threads == 1) {
    worker(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t, threads);
  }

  const double n = static_cast<double>(g.num_nodes());
  const double runs = static_cast<double>(cfg.n_runs);
  trace.mean_fraction.assign(n_samples, 0.0);
  trace.std_fraction.assign(n_samples, 0.0);
  for (std::size_t k = 0; k < n_samples; ++k) {
    double sum = 0.0;
    for (std::size_t r = 0; r < cfg.n_runs; ++r) sum += static_cast<double>(counts[r][k]) / n;
    const double mean = sum / runs;
    double sq = 0.0;
    for (std::size_t r = 0; r < cfg.n_runs; ++r) {
      const double d = static_cast<double>(counts[r][k]) / n - mean;
      sq += d * d;
    }
    trace.mean_fraction[k] = mean;
    trace.std_fraction[k] = cfg.n_runs > 1 ? std::sqrt(sq / (runs - 1.0)) : 0.0;
  }
  trace.per_run_final.resize(cfg.n_runs);
  for (std::size_t r = 0; r < cfg.n_runs; ++r) {
    trace.per_run_final[r] = static_cast<double>(counts[r].back()) / n;
  }
  return trace;
}

double early_log_slope(const SisTrace& trace, double window) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < trace.times.size() && trace.times[k] <= window + 1e-12; ++k) {
    if (trace.mean_fraction[k] <= 0.0) continue;
    const double x = trace.times[k], y = std::log(trace.mean_fraction[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) return 0.0;
  const double c = static_cast<double>(count);
  return (c * sxy - sx * sy) / (c * sxx - sx * sx);
}

}  // namespace disrec
