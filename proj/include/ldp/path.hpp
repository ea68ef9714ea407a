#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ldp {

// Interpolation rule attached to a sampled trajectory.  Simulated jump paths
// are step functions (right-continuous), deterministic targets are polygons.
enum class Interp { kStepRight, kLinear };

class HistoryView;

// Trajectory sampled on a strictly increasing grid with times[0] == 0.
class Path {
 public:
  Path() = default;
  Path(std::vector<double> times, std::vector<double> values, Interp interp);

  // Uniform grid 0, dt, 2dt, ..., T filled with a constant value.
  static Path constant(double T, double dt, double x0, Interp interp);

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }
  Interp interp() const { return interp_; }

  std::size_t size() const { return times_.size(); }
  double x0() const { return values_.front(); }
  double end_time() const { return times_.back(); }

  // Value at time t under this path's interpolation rule.  Queries beyond the
  // grid end return the last sample; the path is frozen there.
  double value_at(double t) const;

  // Index of the grid cell [t_i, t_{i+1}) containing t (last cell for t >= end).
  std::size_t cell_index(double t) const;

  // Slope of the grid cell containing t (piecewise-linear reading of the grid).
  double slope_at(double t) const;

  // Snapshot of the trajectory on [0, t].  The returned view caches the value
  // and running sup at t, so later writes to this path are not observable
  // through it.
  HistoryView history(double t) const;

  // Mutation used by property tests probing predictability; keeps the
  // running-max cache consistent.
  void set_value(std::size_t i, double v);

 private:
  friend class HistoryView;
  void rebuild_running_max();

  std::vector<double> times_;
  std::vector<double> values_;
  std::vector<double> abs_running_max_;
  Interp interp_ = Interp::kLinear;
};

// Read-only window of a trajectory up to an evaluation time.  Coefficient
// evaluators receive one of these; they cannot see past the end.  The sample
// at the end time plays the role of the left limit X_{t-}: in the discrete
// embedding every jump of cell k lands strictly inside (t_k, t_{k+1}), so the
// committed value at t_k is exactly the limit from the left.
class HistoryView {
 public:
  HistoryView(std::span<const double> times, std::span<const double> values,
              Interp interp, double end_time, double end_value, double sup_abs,
              double x0);

  double x0() const { return x0_; }
  double end_time() const { return end_time_; }

  // X_{t-}: most recent value.
  double left_value() const { return end_value_; }

  // X*_{t-}: running sup of |X| over [0, t].
  double left_sup_abs() const { return sup_abs_; }

  // Value at s <= end_time under the underlying interpolation rule; the
  // segment between the last committed sample and the end is linear.
  double value_at(double s) const;

  // Mean of the trajectory over [s0, s1] (trapezoid/rectangle rule exact for
  // the interpolant).  For an empty window returns the value at s1.
  double average_on(double s0, double s1) const;

 private:
  std::span<const double> times_;
  std::span<const double> values_;
  Interp interp_;
  double end_time_;
  double end_value_;
  double sup_abs_;
  double x0_;
};

// Append-only trajectory buffer used by the integrators and the simulator.
// Keeps the running max incrementally and can expose a provisional sample
// beyond the committed prefix (Runge-Kutta stages probe there).
class ScratchPath {
 public:
  ScratchPath(std::size_t capacity, Interp interp);

  void reset(double x0);
  void commit(double t, double v);
  void set_provisional(double t, double v);
  void clear_provisional();

  std::size_t committed() const { return n_; }
  double last_time() const { return times_[n_ - 1]; }
  double last_value() const { return values_[n_ - 1]; }
  double sup_abs() const { return sup_; }

  // View through the provisional sample if one is set, else through the
  // committed prefix.
  HistoryView view() const;

  Path to_path() const;

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  std::size_t n_ = 0;
  double sup_ = 0.0;
  bool has_prov_ = false;
  double prov_t_ = 0.0;
  double prov_v_ = 0.0;
  Interp interp_;
};

}  // namespace ldp
