#pragma once

#include <limits>
#include <string>
#include <vector>

#include "ldp/model.hpp"

namespace ldp {

// Coefficients frozen at one (t, X): the cumulant in lambda is then a cheap
// one-dimensional function.  Solvers and the simulator build one frame per
// grid step and reuse it for every lambda evaluation.
struct CumulantFrame {
  double a = 0.0;
  double b2 = 0.0;
  std::vector<double> w;   // atom / quadrature weights
  std::vector<double> fv;  // jump sizes f(t, X, u_i)

  // value of G, its first two lambda-derivatives, all guarded against
  // exponent overflow: `ok` false means some lambda * f_i left the safe range
  // and `overflow_sign` carries the sign of the runaway term.
  struct Eval {
    double G = 0.0;
    double g = 0.0;
    double g2 = 0.0;
    bool ok = true;
    int overflow_sign = 0;
  };
  Eval eval(double lambda) const;

  double compensator() const;  // integral of f against q
  double mass_pos(double tol = 1e-14) const;  // q-mass where f > tol
  double mass_neg(double tol = 1e-14) const;  // q-mass where f < -tol

  // Endpoints of the closure of the range of g.  Infinite unless the
  // diffusion vanishes and all jumps point one way.
  double range_lo() const;
  double range_hi() const;
};

CumulantFrame make_frame(const CoefficientModel& m, double t,
                         const HistoryView& x);

// G(lambda; t, X) = lambda a + lambda^2 b^2 / 2 + int (e^{lambda f} - 1 -
// lambda f) q(du), and its first two derivatives in lambda.  Throw
// CumulantOverflow when the exponent guard trips.
double cumulant_G(const CoefficientModel& m, double lambda, double t,
                  const Path& x);
double cumulant_g(const CoefficientModel& m, double lambda, double t,
                  const Path& x);
double cumulant_g2(const CoefficientModel& m, double lambda, double t,
                   const Path& x);

enum class TiltStatus {
  kInterior,        // y in the open range of g, root found
  kBoundaryLow,     // y equals the finite lower range endpoint
  kBoundaryHigh,    // y equals the finite upper range endpoint
  kDegeneratePoint, // g is constant (b = 0, f == 0)
  kInfinite,        // y outside the closed range: H = +inf
};

struct SolveOptions {
  double tol_root = 1e-10;      // residual tolerance, scaled by (1 + |y|)
  double boundary_tol = 1e-12;  // |y - endpoint| tolerance, scaled by (1 + |y|)
  int max_iter = 200;
};

struct TiltSolution {
  double lambda = 0.0;  // +-inf sentinels on boundary statuses
  double H = 0.0;       // +inf sentinel when status == kInfinite
  TiltStatus status = TiltStatus::kInterior;
  int iterations = 0;
};

// Solve g(lambda) = y by safeguarded Newton inside an expanding bracket.
// Boundary values of y get the closed-form transform limit instead of a root:
// H there is the q-mass of the jumps still active in the limit.
TiltSolution solve_lambda(const CumulantFrame& fr, double y,
                          const SolveOptions& opts = {});
TiltSolution solve_lambda(const CoefficientModel& m, double y, double t,
                          const Path& x, const SolveOptions& opts = {});

// Legendre transform H(y; t, X) = sup_lambda [lambda y - G(lambda)], returned
// with the maximizing lambda and the solve status.  H is clamped at 0 from
// below (the sup is nonnegative since G(0) = 0).
TiltSolution legendre_H(const CumulantFrame& fr, double y,
                        const SolveOptions& opts = {});
TiltSolution legendre_H(const CoefficientModel& m, double y, double t,
                        const Path& x, const SolveOptions& opts = {});

enum class Degeneracy { kNondegenerate, kDegenerate, kIndeterminate };

enum class BoundKind {
  kLog,         // both jump directions active: logarithmic growth gauge
  kLinear,      // diffusion only: linear gauge
  kMixedPlus,   // upward jumps + diffusion active, downward jumps absent
  kMixedMinus,  // downward jumps + diffusion active, upward jumps absent
  kUnsupported,
};

struct DegeneracyReport {
  Degeneracy f_plus = Degeneracy::kIndeterminate;
  Degeneracy f_minus = Degeneracy::kIndeterminate;
  Degeneracy diffusion = Degeneracy::kIndeterminate;
  BoundKind bound_kind = BoundKind::kUnsupported;
  bool poisson_type = false;  // pure-jump one-sided form, floor-path route applies
  double delta = 0.0;         // probe tube radius witness
  double gamma = 0.0;         // jump-size threshold witness
};

// Probes the coefficients on perturbations of phi inside a delta-tube and
// classifies which noise directions stay active, then picks the growth gauge
// used by upper-bound arguments.  Inconclusive probe evidence yields
// kIndeterminate and an unsupported bound kind.
DegeneracyReport classify_nondegeneracy(const CoefficientModel& m,
                                        const Path& phi, double T,
                                        double delta, double gamma,
                                        int probe_paths = 32);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace ldp
