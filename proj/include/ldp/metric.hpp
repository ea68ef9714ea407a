#pragma once

#include <cstdint>
#include <vector>

#include "ldp/model.hpp"
#include "ldp/path.hpp"
#include "ldp/simulate.hpp"

namespace ldp {

// Sup of |x - y| over [0, T] evaluated on the merged grid (both endpoint
// values and within-cell left limits, which is exact for the step/linear
// interpolation classes).  Paths are frozen at their last value beyond their
// grid end.
double sup_distance(const Path& x, const Path& y, double T);

struct MetricEstimate {
  double lower = 0.0;  // best time-change found minus the search slack
  double upper = 0.0;  // sup-norm envelope bound
  int resolution = 0;  // time-change search grid used for the lower bound
};

// Bracketed estimate of the metric on paths over the infinite half-line:
// per horizon level k the trajectories are compressed through
// alpha(t) = -log(1 - t) and the taper g_k, compared under piecewise-linear
// time changes.  The result is an interval, never an exact value: `upper`
// comes from the sup-norm envelope (min over k of sup_{t <= k+1}|x - y| +
// 2^{-k}), `lower` from a grid search over one-knee time changes with a
// declared slack subtracted.  lower <= upper always holds.
MetricEstimate skorokhod_rho(const Path& x, const Path& y, int K = 4,
                             int resolution = 16);

// Compressed-modulus of continuity: sup of |phi_{u g_k(u)} - phi_{v g_k(v)}|
// over pairs u, v <= k+1 with |u - v| <= sigma, scanned on a grid of
// `resolution` points per unit time merged with the path knots.
double modulus_Wk(const Path& phi, int k, double sigma, int resolution = 64);

struct TightnessRow {
  double n = 0.0;
  double x = 0.0;     // the c or window-width value this row probes
  double stat = 0.0;  // n^{-1} log empirical probability, -inf when count = 0
  double se = 0.0;    // delta-method standard error
  bool zero_count = false;
};

struct TightnessTables {
  std::vector<TightnessRow> sup_rows;        // P(X*_L >= c)
  std::vector<TightnessRow> increment_rows;  // max_s P(sup_{t<=w}|X_{s+t}-X_s| >= eta)
  bool sup_trend_ok = true;        // statistic nonincreasing in c at fixed n
  bool increment_trend_ok = true;  // statistic nonincreasing as w shrinks
};

// Monte Carlo versions of the two exponential-tightness statistics: the
// running-sup tail over [0, L] against the c grid, and the short-window
// increment tail maximized over a deterministic grid of start times (an
// under-estimate of the stopping-time supremum) against the window grid.
TightnessTables tightness_diagnostics(const CoefficientModel& m,
                                      const std::vector<double>& n_list,
                                      double L,
                                      const std::vector<double>& c_grid,
                                      const std::vector<double>& window_grid,
                                      double eta, std::int64_t M,
                                      const SimConfig& base_cfg);

}  // namespace ldp
