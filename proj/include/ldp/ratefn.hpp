#pragma once

#include <cstdint>
#include <vector>

#include "ldp/cumulant.hpp"
#include "ldp/model.hpp"

namespace ldp {

struct RateResult {
  double value = 0.0;          // midpoint-rule action integral, +inf sentinel
  double refined_value = 0.0;  // same integral with every cell split in two
  bool finite = true;
  bool ac_check = true;        // false when phi is not a polygon from x0
  int boundary_steps = 0;      // cells resolved by a boundary branch
  std::int64_t infinite_cell = -1;  // first cell whose H blew up, -1 if none
  std::vector<double> step_times;   // cell midpoints
  std::vector<double> per_step_H;   // H per cell; value == sum(H * width)
};

// Action integral I_T(phi) = int_0^T H(phi'(t); t, phi) dt for a polygonal
// phi started at the model's x0.  Step-interpolated or wrongly anchored paths
// get +inf (not absolutely continuous from x).  Threads parallelize the
// per-cell transform evaluations; `threads` <= 0 means library default.
RateResult rate_I(const CoefficientModel& m, const Path& phi, double T,
                  int threads = 0);

// Deterministic flow dY = a(t, Y) dt, Y_0 = x0, fourth-order Runge-Kutta with
// the history rebuilt incrementally (stages interpolate linearly).  Throws
// FluidBlowup if |Y| passes 1e12 before the horizon.
Path fluid_limit(const CoefficientModel& m, double T, double dt);

// Minimal-velocity path of a pure-jump one-sided model:
// dpsi = (a - int f q) dt.  Validates b == 0, f > 0 on the marks, finite mass
// along the solve and throws NotPoissonType with the violated clause.
Path poisson_floor_path(const CoefficientModel& m, double T, double dt);

// Copy of phi with every cell slope exceeding N in magnitude flattened to 0;
// later values shift accordingly.
Path truncate_N(const Path& phi, double N);

struct ConditionIVReport {
  std::vector<double> n_grid;
  std::vector<double> values;  // integral of max_{N <= n_j} H(phi'; t, phi^N)
  double top_ratio = 0.0;      // last value / previous value
  bool pass = false;           // top_ratio <= 1 + 1e-3
};

// Empirical integrability probe: the nested maxima over truncation levels
// should saturate as N grows.
ConditionIVReport check_condition_IV(const CoefficientModel& m,
                                     const Path& phi, double T,
                                     const std::vector<double>& n_grid);

// Piecewise-constant test function: value values[i] on (breaks[i-1], breaks[i]]
// with breaks[-1] := 0, and 0 beyond the last break.
struct StepFunction {
  std::vector<double> breaks;
  std::vector<double> values;

  double at(double t) const;
};

// Duality evaluation  int lambda dphi - int G(lambda(t); t, phi) dt  for one
// step function.  The first integral is the exact Stieltjes sum against phi;
// the second uses midpoint quadrature on the merged grid.  Never exceeds the
// action integral beyond quadrature tolerance; the supremum over step
// functions recovers it.
double dual_rate_step(const CoefficientModel& m, const Path& phi, double T,
                      const StepFunction& lambda_steps);

// Step function that attains the duality supremum up to discretization: the
// maximizing tilt per cell of phi.
StepFunction optimal_step_function(const CoefficientModel& m, const Path& phi,
                                   double T);

}  // namespace ldp
