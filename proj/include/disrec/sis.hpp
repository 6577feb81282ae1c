#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "disrec/graph.hpp"

namespace disrec {

struct SisConfig {
  double tau = 0.3;    // transmission rate per S-I edge
  double gamma = 1.0;  // recovery rate per infected node
  double rho = 0.05;   // initial infected fraction, ceil(rho * n) nodes
  double t_max = 30.0;
  std::size_t n_runs = 50;
  double sample_dt = 0.1;
  std::uint64_t seed = 0;

  void validate() const;  // throws InputError
};

struct SisTrace {
  std::vector<double> times;
  std::vector<double> mean_fraction;
  std::vector<double> std_fraction;
  std::vector<double> per_run_final;
};

// Exact continuous-time SIS. Each run uses its own substream (seed, run),
// so the result does not depend on `threads`.
SisTrace simulate_sis(const SparseGraph& g, const SisConfig& cfg, unsigned threads = 1);

// Least-squares slope of log(mean infected fraction) over [0, window].
// Samples with zero infection are skipped.
double early_log_slope(const SisTrace& trace, double window = 1.0);

}  // namespace disrec
