#include "ldp/cumulant.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ldp/errors.hpp"

namespace ldp {

namespace {
constexpr double kExpCap = 700.0;
constexpr double kZeroTol = 1e-14;
constexpr double kHuge = 1e300;
}  // namespace

CumulantFrame::Eval CumulantFrame::eval(double lambda) const {
  Eval e;
  e.G = lambda * a + 0.5 * lambda * lambda * b2;
  e.g = a + lambda * b2;
  e.g2 = b2;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double z = lambda * fv[i];
    if (z > kExpCap) {
      e.ok = false;
      e.overflow_sign = fv[i] > 0.0 ? 1 : -1;
      return e;
    }
    double em1 = std::expm1(z);
    e.G += w[i] * (em1 - z);
    e.g += w[i] * fv[i] * em1;
    e.g2 += w[i] * fv[i] * fv[i] * (em1 + 1.0);
  }
  return e;
}

double CumulantFrame::compensator() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * fv[i];
  return acc;
}

double CumulantFrame::mass_pos(double tol) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (fv[i] > tol) acc += w[i];
  return acc;
}

double CumulantFrame::mass_neg(double tol) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (fv[i] < -tol) acc += w[i];
  return acc;
}

double CumulantFrame::range_lo() const {
  if (b2 > kZeroTol || mass_neg() > 0.0) return -kInf;
  double acc = a;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (fv[i] > kZeroTol) acc -= w[i] * fv[i];
  return acc;
}

double CumulantFrame::range_hi() const {
  if (b2 > kZeroTol || mass_pos() > 0.0) return kInf;
  double acc = a;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (fv[i] < -kZeroTol) acc -= w[i] * fv[i];
  return acc;
}

CumulantFrame make_frame(const CoefficientModel& m, double t,
                         const HistoryView& x) {
  CumulantFrame fr;
  fr.a = m.drift(t, x);
  double b = m.diffusion(t, x);
  fr.b2 = b * b;
  const auto& pts = m.q.points();
  fr.w.reserve(pts.size());
  fr.fv.reserve(pts.size());
  for (const auto& p : pts) {
    fr.w.push_back(p.w);
    fr.fv.push_back(m.jump(t, x, p.u));
  }
  return fr;
}

namespace {

CumulantFrame::Eval eval_or_throw(const CumulantFrame& fr, double lambda) {
  auto e = fr.eval(lambda);
  if (!e.ok)
    throw CumulantOverflow("cumulant overflow at lambda=" +
                           std::to_string(lambda));
  return e;
}

// g with overflow regions mapped to huge signed values, good enough to steer
// a bracket.
double g_safe(const CumulantFrame& fr, double lambda) {
  auto e = fr.eval(lambda);
  return e.ok ? e.g : e.overflow_sign * kHuge;
}

}  // namespace

double cumulant_G(const CoefficientModel& m, double lambda, double t,
                  const Path& x) {
  return eval_or_throw(make_frame(m, t, x.history(t)), lambda).G;
}

double cumulant_g(const CoefficientModel& m, double lambda, double t,
                  const Path& x) {
  return eval_or_throw(make_frame(m, t, x.history(t)), lambda).g;
}

double cumulant_g2(const CoefficientModel& m, double lambda, double t,
                   const Path& x) {
  return eval_or_throw(make_frame(m, t, x.history(t)), lambda).g2;
}

TiltSolution solve_lambda(const CumulantFrame& fr, double y,
                          const SolveOptions& opts) {
  TiltSolution sol;
  double yscale = 1.0 + std::abs(y);

  bool has_jumps = false;
  for (std::size_t i = 0; i < fr.fv.size(); ++i)
    if (fr.w[i] > 0.0 && std::abs(fr.fv[i]) > kZeroTol) has_jumps = true;

  if (fr.b2 <= kZeroTol && !has_jumps) {
    // g is the constant a: the transform is the indicator-type function.
    sol.status = TiltStatus::kDegeneratePoint;
    sol.lambda = 0.0;
    sol.H = std::abs(y - fr.a) <= opts.boundary_tol * yscale ? 0.0 : kInf;
    return sol;
  }

  double lo_end = fr.range_lo();
  double hi_end = fr.range_hi();
  if (std::isfinite(lo_end) && std::abs(y - lo_end) <= opts.boundary_tol * yscale) {
    sol.status = TiltStatus::kBoundaryLow;
    sol.lambda = -kInf;
    sol.H = fr.mass_pos();  // only the still-active jumps survive the limit
    return sol;
  }
  if (std::isfinite(hi_end) && std::abs(y - hi_end) <= opts.boundary_tol * yscale) {
    sol.status = TiltStatus::kBoundaryHigh;
    sol.lambda = kInf;
    sol.H = fr.mass_neg();
    return sol;
  }
  if (y < lo_end) {
    sol.status = TiltStatus::kInfinite;
    sol.lambda = -kInf;
    sol.H = kInf;
    return sol;
  }
  if (y > hi_end) {
    sol.status = TiltStatus::kInfinite;
    sol.lambda = kInf;
    sol.H = kInf;
    return sol;
  }

  // Interior: bracket the root of g(lambda) = y, doubling outward from a
  // Newton-style first guess, then safeguarded Newton.
  double g2_0 = fr.eval(0.0).ok ? fr.eval(0.0).g2 : fr.b2;
  double guess = (y - fr.a) / std::max(g2_0, 1e-12);
  guess = std::clamp(guess, -1.0, 1.0);
  double lo = std::min(guess, 0.0) - 1.0;
  double hi = std::max(guess, 0.0) + 1.0;
  int it = 0;
  while (g_safe(fr, hi) < y && it++ < opts.max_iter) hi = 2.0 * hi + 1.0;
  while (g_safe(fr, lo) > y && it++ < opts.max_iter) lo = 2.0 * lo - 1.0;

  double lam = std::clamp(guess, lo, hi);
  double tol = opts.tol_root * yscale;
  for (; it < opts.max_iter; ++it) {
    auto e = fr.eval(lam);
    if (!e.ok) {
      // Stepped into the overflow zone: retreat by bisection.
      if (e.overflow_sign > 0) hi = lam; else lo = lam;
      lam = 0.5 * (lo + hi);
      continue;
    }
    double resid = e.g - y;
    if (std::abs(resid) <= tol) break;
    if (resid > 0.0) hi = lam; else lo = lam;
    double step = resid / std::max(e.g2, 1e-300);
    double next = lam - step;
    if (!std::isfinite(next) || next <= lo || next >= hi)
      next = 0.5 * (lo + hi);
    lam = next;
  }
  sol.lambda = lam;
  sol.iterations = it;
  sol.status = TiltStatus::kInterior;
  auto e = eval_or_throw(fr, lam);
  sol.H = std::max(lam * y - e.G, 0.0);
  return sol;
}

TiltSolution solve_lambda(const CoefficientModel& m, double y, double t,
                          const Path& x, const SolveOptions& opts) {
  return solve_lambda(make_frame(m, t, x.history(t)), y, opts);
}

TiltSolution legendre_H(const CumulantFrame& fr, double y,
                        const SolveOptions& opts) {
  return solve_lambda(fr, y, opts);
}

TiltSolution legendre_H(const CoefficientModel& m, double y, double t,
                        const Path& x, const SolveOptions& opts) {
  return solve_lambda(make_frame(m, t, x.history(t)), y, opts);
}

DegeneracyReport classify_nondegeneracy(const CoefficientModel& m,
                                        const Path& phi, double T,
                                        double delta, double gamma,
                                        int probe_paths) {
  DegeneracyReport rep;
  rep.delta = delta;
  rep.gamma = gamma;

  // Perturbations of phi inside the delta-tube: constant shifts, square
  // waves, ramps, and seeded uniform noise.  The classification is a
  // deterministic diagnostic, so the noise seed is fixed.
  const int cells = 64;
  std::vector<double> ts(cells + 1);
  for (int i = 0; i <= cells; ++i) ts[i] = T * i / cells;
  std::mt19937_64 eng(1234);
  std::uniform_real_distribution<double> unif(-delta, delta);

  std::vector<Path> probes;
  for (int p = 0; p < probe_paths; ++p) {
    std::vector<double> vs(cells + 1);
    for (int i = 0; i <= cells; ++i) {
      double base = phi.value_at(ts[i]);
      double bump;
      switch (p) {
        case 0: bump = 0.0; break;
        case 1: bump = delta; break;
        case 2: bump = -delta; break;
        case 3: bump = (i % 2 == 0) ? delta : -delta; break;
        case 4: bump = (i % 2 == 0) ? -delta : delta; break;
        case 5: bump = delta * (2.0 * i / cells - 1.0); break;
        default: bump = unif(eng); break;
      }
      vs[i] = base + bump;
    }
    probes.emplace_back(ts, std::move(vs), Interp::kLinear);
  }

  const double tol = 1e-14;
  bool plus_all_active = true, plus_all_dead = true;
  bool minus_all_active = true, minus_all_dead = true;
  bool b_all_active = true, b_all_dead = true;
  for (const Path& probe : probes) {
    double sup_plus_gamma = 0.0, sup_plus = 0.0;
    double sup_minus_gamma = 0.0, sup_minus = 0.0;
    double inf_b2 = kInf, sup_b2 = 0.0;
    for (int i = 0; i < cells; ++i) {
      double t = (ts[i] + ts[i + 1]) / 2.0;
      HistoryView v = probe.history(t);
      double b = m.b(t, v);
      inf_b2 = std::min(inf_b2, b * b);
      sup_b2 = std::max(sup_b2, b * b);
      double pg = 0.0, pa = 0.0, mg = 0.0, ma = 0.0;
      for (const auto& at : m.q.points()) {
        double f = m.f ? m.f(t, v, at.u) : 0.0;
        if (f > 0.0) {
          pa += at.w * f;
          if (f > gamma) pg += at.w * f;
        } else if (f < 0.0) {
          ma += at.w * (-f);
          if (-f > gamma) mg += at.w * (-f);
        }
      }
      sup_plus_gamma = std::max(sup_plus_gamma, pg);
      sup_plus = std::max(sup_plus, pa);
      sup_minus_gamma = std::max(sup_minus_gamma, mg);
      sup_minus = std::max(sup_minus, ma);
    }
    plus_all_active &= sup_plus_gamma > tol;
    plus_all_dead &= sup_plus <= tol;
    minus_all_active &= sup_minus_gamma > tol;
    minus_all_dead &= sup_minus <= tol;
    b_all_active &= inf_b2 > tol;
    b_all_dead &= sup_b2 <= tol;
  }

  auto verdict = [](bool active, bool dead) {
    if (active) return Degeneracy::kNondegenerate;
    if (dead) return Degeneracy::kDegenerate;
    return Degeneracy::kIndeterminate;
  };
  rep.f_plus = verdict(plus_all_active, plus_all_dead);
  rep.f_minus = verdict(minus_all_active, minus_all_dead);
  rep.diffusion = verdict(b_all_active, b_all_dead);

  const auto non = Degeneracy::kNondegenerate;
  const auto deg = Degeneracy::kDegenerate;
  if (rep.f_plus == non && rep.f_minus == non) {
    rep.bound_kind = BoundKind::kLog;
  } else if (rep.diffusion == non && rep.f_plus == deg && rep.f_minus == deg) {
    rep.bound_kind = BoundKind::kLinear;
  } else if (rep.diffusion == non && rep.f_plus == non && rep.f_minus == deg) {
    rep.bound_kind = BoundKind::kMixedPlus;
  } else if (rep.diffusion == non && rep.f_plus == deg && rep.f_minus == non) {
    rep.bound_kind = BoundKind::kMixedMinus;
  } else {
    rep.bound_kind = BoundKind::kUnsupported;
  }
  rep.poisson_type = rep.diffusion == deg && rep.f_minus == deg &&
                     rep.f_plus == non;
  return rep;
}

}  // namespace ldp
