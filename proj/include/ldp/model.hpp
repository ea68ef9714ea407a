#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ldp/jump_measure.hpp"
#include "ldp/path.hpp"

namespace ldp {

using DriftFn = std::function<double(double t, const HistoryView& x)>;
using DiffusionFn = std::function<double(double t, const HistoryView& x)>;
using JumpFn = std::function<double(double t, const HistoryView& x, double u)>;
using EnvelopeFn = std::function<double(double t_or_u)>;

// Coefficients of the scaled dynamics
//   dX = a(t,X) dt + n^{-1/2} b(t,X) dW + n^{-1} f(t,X,u) d(jumps - compensator),
// together with the growth envelopes:  |a|, b^2 are bounded by l(t)(1 + X*_{t-})
// and |f(t,X,u)| by h(u) l(t)(1 + X*_{t-}).  Evaluators only ever see a
// HistoryView, which is how predictability is kept mechanical.  Instances are
// immutable after construction and safe to share across threads.
struct CoefficientModel {
  std::string name;
  double x0 = 0.0;
  DriftFn a;
  DiffusionFn b;
  JumpFn f;          // may be null when q is empty
  JumpMeasure q;
  EnvelopeFn l;      // t -> envelope scale, nondecreasing
  EnvelopeFn h;      // u -> mark envelope
  bool growth_checks = false;

  // Copy whose a/b/f evaluations assert the envelope bounds (test/debug use;
  // throws GrowthViolation on the first breach).
  CoefficientModel with_growth_checks() const;

  double drift(double t, const HistoryView& x) const;
  double diffusion(double t, const HistoryView& x) const;
  double jump(double t, const HistoryView& x, double u) const;
};

// Validates the pieces and assembles a model.  Throws ValidationError when a
// required evaluator is missing or q carries atoms but f is null.
CoefficientModel make_model(std::string name, double x0, DriftFn a,
                            DiffusionFn b, JumpFn f, JumpMeasure q,
                            EnvelopeFn l, EnvelopeFn h);

// K(lambda) = integral of e^{lambda h(u)} - 1 - lambda h(u) against q.
// Finite for every lambda because q has finite mass and bounded marks here;
// still guarded by the exponent cap.  Term order follows q.points(), so for
// atomic measures the value is bit-identical to the explicit sum.
double cramer_K(const CoefficientModel& m, double lambda);

struct GrowthReport {
  double max_ratio = 0.0;
  bool pass = false;
  double worst_time = 0.0;
  std::string worst_coefficient;
};

// Samples |a|, b^2, |f| along the path at `samples` evenly spaced times and
// compares against the envelopes.  Pass means max ratio <= 1 + 1e-9.
GrowthReport check_linear_growth(const CoefficientModel& m, const Path& x,
                                 int samples);

struct ContinuityReport {
  // One entry per probe path: max over the time grid and coefficients of the
  // deviation from the values on the limit path.
  std::vector<double> deviations;
  bool trend_pass = false;
};

// Evaluates coefficients on a sequence of paths expected to converge to
// `limit` and reports whether the deviations actually shrink.
ContinuityReport check_c_continuity(const CoefficientModel& m,
                                    const std::vector<Path>& probes,
                                    const Path& limit, int time_samples);

}  // namespace ldp
