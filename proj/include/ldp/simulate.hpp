#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ldp/cumulant.hpp"
#include "ldp/model.hpp"
#include "ldp/path.hpp"
#include "ldp/ratefn.hpp"

namespace ldp {

struct SimConfig {
  double n = 1.0;     // large-deviation scale parameter
  double T = 1.0;     // horizon
  double dt = 1e-2;   // Euler step; must divide T
  std::uint64_t seed = 0;
  double lambda_cap = 50.0;  // tilt clamp
  double tube_gamma = -1.0;  // tilt cutoff radius; < 0 means 2 * delta
  int threads = 0;           // <= 0: library default

  std::size_t steps() const;  // validates dt | T
};

// Per-path bookkeeping of the change-of-measure weight.
struct TiltRecord {
  double log_z = 0.0;          // accumulated log-likelihood exponent at T
  bool tau_hit = false;        // tube-exit cutoff triggered before T
  double tau_time = 0.0;       // grid time of the cutoff (T when never hit)
  std::vector<double> lambdas; // tilt per step (0 after the cutoff)
  std::int64_t clamp_steps = 0;
  std::int64_t root_fail_steps = 0;
  double predicted_qv = 0.0;      // model bracket of the martingale variance
  double realized_qv = 0.0;       // sum of squared martingale increments
  double predicted_qv_tau = 0.0;  // bracket stopped at the cutoff
  double sup_dev = 0.0;           // sup over the grid of |X - phi|
  bool valid = true;              // root failures stayed under 1% of steps
};

// One sample of the scaled dynamics under the original measure.  `stream`
// selects the RNG substream; identical (seed, stream) reproduce the path.
Path simulate_path(const CoefficientModel& m, const SimConfig& cfg,
                   std::uint64_t stream);

// As simulate_path, but additionally evaluates the tilt policy along the
// realized path and accumulates log Z, without changing the dynamics.  Used
// by the martingale (mean-one) diagnostics.
Path simulate_weighted(const CoefficientModel& m, const Path& phi,
                       const SimConfig& cfg, std::uint64_t stream,
                       TiltRecord* rec);

// One sample under the tilted measure steering toward phi: Gaussian
// increments get the drift correction Lambda * b^2, jump counts get the
// factor e^{Lambda f}; the compensator subtraction stays untilted.  The tilt
// switches off permanently once the path has left the gamma-tube around phi.
// With tube_gamma == 0 the tilt never engages and the output is
// path-identical to simulate_path on the same substream.
Path simulate_tilted(const CoefficientModel& m, const Path& phi,
                     const SimConfig& cfg, std::uint64_t stream,
                     TiltRecord* rec);

enum class Method { kCrude, kTilted };

struct EstimateReport {
  std::string method;
  double n = 0.0;
  std::int64_t M = 0;
  double dt = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  double p_hat = 0.0;
  double std_err = 0.0;
  double log_rate = 0.0;     // n^{-1} log p_hat, -inf when p_hat == 0
  double target_rate = 0.0;  // action integral of the center path
  double hit_fraction = 0.0; // unweighted fraction of paths inside the tube
  std::int64_t clamp_count = 0;
  std::int64_t invalid_paths = 0;
  bool gamma_below_delta = false;  // tilted run with cutoff inside the tube
};

// P(sup_{t <= T} |X^n_t - phi_t| <= delta) by plain Monte Carlo or by
// importance sampling under the tilted measure with weights e^{-log Z}.
// Estimates are reduced in fixed path order, so the report is bit-identical
// for any thread count.
EstimateReport estimate_tube_probability(const CoefficientModel& m,
                                         const Path& phi, double delta,
                                         const SimConfig& cfg, std::int64_t M,
                                         Method method);

// Single-threaded reference implementation of the same estimator; kept as
// the comparison baseline for tests and the benchmark.
EstimateReport estimate_tube_probability_serial(const CoefficientModel& m,
                                                const Path& phi, double delta,
                                                const SimConfig& cfg,
                                                std::int64_t M, Method method);

// Per-path sup_{grid} |X - target| over an ensemble (used by the fluid-limit
// contraction diagnostics).
std::vector<double> ensemble_sup_deviation(const CoefficientModel& m,
                                           const Path& target,
                                           const SimConfig& cfg,
                                           std::int64_t M);

struct QvReport {
  double predicted_mean = 0.0;
  double realized_mean = 0.0;
  double ratio = 0.0;   // realized / predicted, aggregated over paths
  double k_hat = 0.0;   // empirical constant: n * max predicted bracket at tau
  std::int64_t M = 0;
};

// Sanity check of the martingale variance bracket under the tilted measure.
QvReport quadratic_variation_diag(const CoefficientModel& m, const Path& phi,
                                  const SimConfig& cfg, std::int64_t M);

}  // namespace ldp
