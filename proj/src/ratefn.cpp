#include "ldp/ratefn.hpp"

#include <algorithm>
#include <cmath>

#include "ldp/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ldp {

namespace {

// Cells of phi's grid clipped to [0, T]: (t0, t1, slope).
struct Cell {
  double t0, t1, slope;
};

std::vector<Cell> clipped_cells(const Path& phi, double T) {
  std::vector<Cell> cells;
  const auto& ts = phi.times();
  const auto& vs = phi.values();
  for (std::size_t i = 0; i + 1 < ts.size() && ts[i] < T; ++i) {
    double t1 = std::min(ts[i + 1], T);
    cells.push_back({ts[i], t1, (vs[i + 1] - vs[i]) / (ts[i + 1] - ts[i])});
  }
  return cells;
}

double neumaier_sum(const std::vector<double>& xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  return s + c;
}

}  // namespace

RateResult rate_I(const CoefficientModel& m, const Path& phi, double T,
                  int threads) {
  RateResult res;
  if (phi.interp() != Interp::kLinear) {
    res.ac_check = false;
    res.finite = false;
    res.value = res.refined_value = kInf;
    return res;
  }
  if (std::abs(phi.x0() - m.x0) > 1e-12 * (1.0 + std::abs(m.x0))) {
    res.finite = false;
    res.value = res.refined_value = kInf;
    return res;
  }
  if (phi.end_time() < T - 1e-12)
    throw ValidationError("path ends before the requested horizon");

  auto cells = clipped_cells(phi, T);
  auto n = static_cast<std::int64_t>(cells.size());
  res.step_times.resize(n);
  res.per_step_H.resize(n);
  std::vector<double> base_terms(n), fine_terms(n);
  std::vector<int> boundary(n, 0);
  std::vector<std::int64_t> infinite(n, 0);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads > 0 ? threads : omp_get_max_threads())
#endif
  for (std::int64_t i = 0; i < n; ++i) {
    const Cell& c = cells[i];
    double w = c.t1 - c.t0;
    double tm = 0.5 * (c.t0 + c.t1);
    TiltSolution sol = legendre_H(m, c.slope, tm, phi);
    res.step_times[i] = tm;
    res.per_step_H[i] = sol.H;
    if (sol.status == TiltStatus::kInfinite || !std::isfinite(sol.H)) {
      infinite[i] = 1;
      base_terms[i] = kInf;
      fine_terms[i] = kInf;
      continue;
    }
    if (sol.status == TiltStatus::kBoundaryLow ||
        sol.status == TiltStatus::kBoundaryHigh)
      boundary[i] = 1;
    base_terms[i] = sol.H * w;
    // One refinement: quarter-point evaluations with the same slope.
    TiltSolution a = legendre_H(m, c.slope, c.t0 + 0.25 * w, phi);
    TiltSolution b = legendre_H(m, c.slope, c.t0 + 0.75 * w, phi);
    fine_terms[i] = 0.5 * w * (a.H + b.H);
  }
  (void)threads;

  for (std::int64_t i = 0; i < n; ++i) {
    res.boundary_steps += boundary[i];
    if (infinite[i] && res.infinite_cell < 0) res.infinite_cell = i;
  }
  if (res.infinite_cell >= 0) {
    res.finite = false;
    res.value = res.refined_value = kInf;
    return res;
  }
  res.value = neumaier_sum(base_terms);
  res.refined_value = neumaier_sum(fine_terms);
  return res;
}

namespace {

// Shared RK4 driver: rhs sees the history through the provisional stage
// sample, which keeps the scheme classical for coefficient functionals that
// read the trajectory near its right end.
template <class Rhs>
Path integrate_ode(Rhs&& rhs, double x0, double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0)) throw ValidationError("bad horizon/grid");
  auto msteps = static_cast<std::size_t>(std::llround(T / dt));
  if (msteps == 0 ||
      std::abs(static_cast<double>(msteps) * dt - T) > 1e-12 * std::max(1.0, T))
    throw ValidationError("dt must divide T");

  ScratchPath y(msteps + 1, Interp::kLinear);
  y.reset(x0);
  for (std::size_t k = 0; k < msteps; ++k) {
    double t = static_cast<double>(k) * dt;
    double t1 = (k + 1 == msteps) ? T : static_cast<double>(k + 1) * dt;
    double v = y.last_value();
    double k1 = rhs(t, y.view());
    y.set_provisional(t + 0.5 * dt, v + 0.5 * dt * k1);
    double k2 = rhs(t + 0.5 * dt, y.view());
    y.set_provisional(t + 0.5 * dt, v + 0.5 * dt * k2);
    double k3 = rhs(t + 0.5 * dt, y.view());
    y.set_provisional(t1, v + dt * k3);
    double k4 = rhs(t1, y.view());
    double next = v + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(next) || std::abs(next) > 1e12)
      throw FluidBlowup("flow left the representable range before t=" +
                        std::to_string(t1));
    y.commit(t1, next);
  }
  return y.to_path();
}

}  // namespace

Path fluid_limit(const CoefficientModel& m, double T, double dt) {
  return integrate_ode(
      [&m](double t, const HistoryView& v) { return m.drift(t, v); }, m.x0, T,
      dt);
}

Path poisson_floor_path(const CoefficientModel& m, double T, double dt) {
  if (m.q.empty() || !(m.q.total_mass() > 0.0))
    throw NotPoissonType("jump measure is empty");
  auto rhs = [&m](double t, const HistoryView& v) {
    double b = m.diffusion(t, v);
    if (std::abs(b) > 1e-12)
      throw NotPoissonType("diffusion does not vanish at t=" + std::to_string(t));
    double comp = 0.0;
    for (const auto& p : m.q.points()) {
      double f = m.jump(t, v, p.u);
      if (!(f > 0.0))
        throw NotPoissonType("jump size not bounded away from zero at t=" +
                             std::to_string(t));
      comp += p.w * f;
    }
    return m.drift(t, v) - comp;
  };
  return integrate_ode(rhs, m.x0, T, dt);
}

Path truncate_N(const Path& phi, double N) {
  const auto& ts = phi.times();
  const auto& vs = phi.values();
  std::vector<double> out(vs.size());
  out[0] = vs[0];
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    double dt = ts[i + 1] - ts[i];
    double slope = (vs[i + 1] - vs[i]) / dt;
    out[i + 1] = out[i] + (std::abs(slope) <= N ? slope * dt : 0.0);
  }
  return Path(ts, std::move(out), phi.interp());
}

ConditionIVReport check_condition_IV(const CoefficientModel& m,
                                     const Path& phi, double T,
                                     const std::vector<double>& n_grid) {
  if (n_grid.size() < 2)
    throw ValidationError("condition-IV probe needs >= 2 truncation levels");
  ConditionIVReport rep;
  rep.n_grid = n_grid;

  std::vector<Path> truncated;
  for (double N : n_grid) truncated.push_back(truncate_N(phi, N));

  auto cells = clipped_cells(phi, T);
  // values[j] integrates the running max of H over the first j+1 levels.
  std::vector<double> acc(n_grid.size(), 0.0);
  for (const Cell& c : cells) {
    double tm = 0.5 * (c.t0 + c.t1);
    double w = c.t1 - c.t0;
    double run_max = 0.0;
    for (std::size_t j = 0; j < n_grid.size(); ++j) {
      TiltSolution sol = legendre_H(m, c.slope, tm, truncated[j]);
      run_max = std::max(run_max, sol.H);
      acc[j] += run_max * w;
    }
  }
  rep.values = acc;
  double prev = acc[acc.size() - 2];
  double last = acc.back();
  rep.top_ratio = prev > 0.0 ? last / prev : (last > 0.0 ? kInf : 1.0);
  rep.pass = std::isfinite(last) && rep.top_ratio <= 1.0 + 1e-3;
  return rep;
}

double StepFunction::at(double t) const {
  if (breaks.empty() || t <= 0.0) return 0.0;
  for (std::size_t i = 0; i < breaks.size(); ++i)
    if (t <= breaks[i]) return values[i];
  return 0.0;
}

double dual_rate_step(const CoefficientModel& m, const Path& phi, double T,
                      const StepFunction& lambda_steps) {
  if (lambda_steps.breaks.size() != lambda_steps.values.size())
    throw ValidationError("step function breaks/values length mismatch");
  for (std::size_t i = 1; i < lambda_steps.breaks.size(); ++i)
    if (lambda_steps.breaks[i] <= lambda_steps.breaks[i - 1])
      throw ValidationError("step function breaks must increase");

  // Exact Stieltjes sum of lambda against dphi.
  double stieltjes = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < lambda_steps.breaks.size(); ++i) {
    double ti = lambda_steps.breaks[i];
    double lo = std::min(prev, T), hi = std::min(ti, T);
    stieltjes +=
        lambda_steps.values[i] * (phi.value_at(hi) - phi.value_at(lo));
    prev = ti;
  }

  // Midpoint quadrature of G(lambda(t); t, phi) on the grid merged from phi's
  // knots and the step breaks.
  std::vector<double> knots;
  for (double t : phi.times())
    if (t < T) knots.push_back(t);
  for (double t : lambda_steps.breaks)
    if (t > 0.0 && t < T) knots.push_back(t);
  knots.push_back(0.0);
  knots.push_back(T);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  double gint = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    double w = knots[i + 1] - knots[i];
    if (w <= 0.0) continue;
    double tm = 0.5 * (knots[i] + knots[i + 1]);
    double lam = lambda_steps.at(tm);
    gint += w * cumulant_G(m, lam, tm, phi);
  }
  return stieltjes - gint;
}

StepFunction optimal_step_function(const CoefficientModel& m, const Path& phi,
                                   double T) {
  StepFunction sf;
  for (const Cell& c : clipped_cells(phi, T)) {
    double tm = 0.5 * (c.t0 + c.t1);
    TiltSolution sol = solve_lambda(m, c.slope, tm, phi);
    double lam = sol.status == TiltStatus::kInterior ? sol.lambda : 0.0;
    sf.breaks.push_back(c.t1);
    sf.values.push_back(lam);
  }
  return sf;
}

}  // namespace ldp
