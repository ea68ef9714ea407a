#include "ldp/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "ldp/errors.hpp"
#include "ldp/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ldp {

namespace {

constexpr double kPoissonMeanCap = 1e9;

double neumaier(const std::vector<double>& xs) {
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

int resolve_threads(int requested) {
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

// Target sampled on the simulation grid: values at grid times and the slope
// of the target cell containing each grid time.
struct TargetGrid {
  std::vector<double> vals;
  std::vector<double> slopes;
};

TargetGrid sample_target(const Path& phi, std::size_t msteps, double dt,
                         double T) {
  TargetGrid tg;
  tg.vals.resize(msteps + 1);
  tg.slopes.resize(msteps);
  for (std::size_t k = 0; k <= msteps; ++k) {
    double t = (k == msteps) ? T : static_cast<double>(k) * dt;
    tg.vals[k] = phi.value_at(t);
    if (k < msteps) tg.slopes[k] = phi.slope_at(static_cast<double>(k) * dt);
  }
  return tg;
}

void fill_frame(const CoefficientModel& m, double t, const HistoryView& v,
                CumulantFrame& fr) {
  fr.a = m.drift(t, v);
  double b = m.diffusion(t, v);
  fr.b2 = b * b;
  fr.w.clear();
  fr.fv.clear();
  for (const auto& p : m.q.points()) {
    fr.w.push_back(p.w);
    fr.fv.push_back(m.jump(t, v, p.u));
  }
}

enum class Mode { kPlain, kWeighted, kTilted };

// One sample path.  kPlain draws under the base measure, kTilted under the
// steered measure; kWeighted keeps base dynamics but still runs the tilt
// policy for the likelihood bookkeeping.  All modes consume the substream
// identically given identical step distributions, which is what makes the
// gamma = 0 tilted run coincide with the plain one draw for draw.
void run_one(const CoefficientModel& m, const TargetGrid* tg,
             const SimConfig& cfg, Mode mode, double gamma,
             std::uint64_t stream, bool keep_lambdas, ScratchPath& sp,
             CumulantFrame& fr, TiltRecord& rec) {
  const std::size_t msteps = cfg.steps();
  const double dt = cfg.dt;
  const double n = cfg.n;
  PathRng rng(cfg.seed, stream);

  rec = TiltRecord{};
  rec.tau_time = cfg.T;
  if (keep_lambdas) rec.lambdas.assign(msteps, 0.0);

  sp.reset(m.x0);
  double running_dev = tg ? std::abs(m.x0 - tg->vals[0]) : 0.0;
  bool was_active = false;
  const bool tilt_policy = mode != Mode::kPlain && tg != nullptr;

  for (std::size_t k = 0; k < msteps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double t1 = (k + 1 == msteps) ? cfg.T : static_cast<double>(k + 1) * dt;
    HistoryView view = sp.view();
    fill_frame(m, t, view, fr);

    // Tilt policy: active while the path has stayed within gamma of phi.
    double lam = 0.0;
    bool active = false;
    if (tilt_policy) {
      active = running_dev < gamma;
      if (active) {
        TiltSolution sol = solve_lambda(fr, tg->slopes[k]);
        switch (sol.status) {
          case TiltStatus::kInterior:
            lam = sol.lambda;
            break;
          case TiltStatus::kBoundaryLow:
            lam = -cfg.lambda_cap;
            ++rec.clamp_steps;
            break;
          case TiltStatus::kBoundaryHigh:
            lam = cfg.lambda_cap;
            ++rec.clamp_steps;
            break;
          default:
            lam = 0.0;
            ++rec.root_fail_steps;
            break;
        }
        if (lam > cfg.lambda_cap) {
          lam = cfg.lambda_cap;
          ++rec.clamp_steps;
        } else if (lam < -cfg.lambda_cap) {
          lam = -cfg.lambda_cap;
          ++rec.clamp_steps;
        }
      } else if (!was_active && k == 0) {
        // Tilt never engaged (gamma = 0): cutoff at time zero.
        rec.tau_hit = true;
        rec.tau_time = 0.0;
      }
      if (keep_lambdas) rec.lambdas[k] = lam;
    }
    const double lam_dyn = (mode == Mode::kTilted) ? lam : 0.0;

    double incr = (fr.a + lam_dyn * fr.b2) * dt;
    if (fr.b2 > 0.0)
      incr += std::sqrt(fr.b2) * std::sqrt(dt / n) * rng.gaussian();

    if (!fr.w.empty()) {
      double comp = fr.compensator();
      double jump_sum = 0.0;
      if (m.q.is_atomic()) {
        for (std::size_t i = 0; i < fr.w.size(); ++i) {
          double mean = n * dt * fr.w[i] * std::exp(lam_dyn * fr.fv[i]);
          if (!(mean < kPoissonMeanCap)) {
            rec.valid = false;
            mean = kPoissonMeanCap;
          }
          jump_sum += static_cast<double>(rng.poisson(mean)) * fr.fv[i];
        }
      } else {
        // Thinning against a majorant built from the quadrature nodes.
        double cmax = 1.0;
        for (double f : fr.fv) cmax = std::max(cmax, std::exp(lam_dyn * f));
        cmax *= 1.0 + 1e-9;
        double mean = n * dt * m.q.total_mass() * cmax;
        if (!(mean < kPoissonMeanCap)) {
          rec.valid = false;
          mean = kPoissonMeanCap;
        }
        long long cand = rng.poisson(mean);
        for (long long j = 0; j < cand; ++j) {
          double u = m.q.sample_mark(rng.uniform());
          double fu = m.jump(t, view, u);
          if (rng.uniform() * cmax <= std::exp(lam_dyn * fu)) jump_sum += fu;
        }
      }
      incr += jump_sum / n - dt * comp;
    }

    // Likelihood exponent and variance bookkeeping.
    if (tilt_policy && lam != 0.0) {
      auto eb = fr.eval(lam);
      if (!eb.ok) {
        rec.valid = false;
      } else {
        rec.log_z += n * (lam * incr - eb.G * dt);
      }
    }
    auto ed = fr.eval(lam_dyn);
    if (ed.ok) {
      double qv_step = dt * fr.b2 / n;
      for (std::size_t i = 0; i < fr.w.size(); ++i)
        qv_step += dt * fr.w[i] * fr.fv[i] * fr.fv[i] *
                   std::exp(lam_dyn * fr.fv[i]) / n;
      rec.predicted_qv += qv_step;
      if (active || !tilt_policy) rec.predicted_qv_tau += qv_step;
      double dm = incr - ed.g * dt;
      rec.realized_qv += dm * dm;
    } else {
      rec.valid = false;
    }

    double next = sp.last_value() + incr;
    sp.commit(t1, next);
    if (tg) {
      double dev = std::abs(next - tg->vals[k + 1]);
      if (dev > running_dev) running_dev = dev;
      if (tilt_policy && active && running_dev >= gamma && !rec.tau_hit) {
        rec.tau_hit = true;
        rec.tau_time = t1;
      }
    }
    was_active = was_active || active;
  }
  rec.sup_dev = running_dev;
  if (rec.root_fail_steps >
      static_cast<std::int64_t>(0.01 * static_cast<double>(msteps)))
    rec.valid = false;
}

void validate_cfg(const SimConfig& cfg) {
  if (!(cfg.n >= 1.0)) throw ValidationError("scale n must be >= 1");
  if (!(cfg.lambda_cap > 0.0)) throw ValidationError("lambda_cap must be > 0");
  cfg.steps();
}

void validate_target(const CoefficientModel& m, const Path& phi, double T) {
  if (phi.interp() != Interp::kLinear)
    throw ValidationError("target path must be piecewise linear");
  if (phi.end_time() < T - 1e-12)
    throw ValidationError("target path ends before the horizon");
  if (std::abs(phi.x0() - m.x0) > 1e-9 * (1.0 + std::abs(m.x0)))
    throw ValidationError("target path must start at the model's x0");
}

}  // namespace

std::size_t SimConfig::steps() const {
  if (!(T > 0.0) || !(dt > 0.0))
    throw ValidationError("horizon and dt must be positive");
  auto msteps = static_cast<std::size_t>(std::llround(T / dt));
  if (msteps == 0 ||
      std::abs(static_cast<double>(msteps) * dt - T) > 1e-12 * std::max(1.0, T))
    throw ValidationError("dt must divide the horizon T");
  return msteps;
}

Path simulate_path(const CoefficientModel& m, const SimConfig& cfg,
                   std::uint64_t stream) {
  validate_cfg(cfg);
  ScratchPath sp(cfg.steps() + 1, Interp::kStepRight);
  CumulantFrame fr;
  TiltRecord rec;
  run_one(m, nullptr, cfg, Mode::kPlain, 0.0, stream, false, sp, fr, rec);
  return sp.to_path();
}

Path simulate_weighted(const CoefficientModel& m, const Path& phi,
                       const SimConfig& cfg, std::uint64_t stream,
                       TiltRecord* rec) {
  validate_cfg(cfg);
  validate_target(m, phi, cfg.T);
  if (cfg.tube_gamma < 0.0)
    throw ValidationError("simulate_weighted needs tube_gamma >= 0");
  TargetGrid tg = sample_target(phi, cfg.steps(), cfg.dt, cfg.T);
  ScratchPath sp(cfg.steps() + 1, Interp::kStepRight);
  CumulantFrame fr;
  TiltRecord local;
  run_one(m, &tg, cfg, Mode::kWeighted, cfg.tube_gamma, stream, rec != nullptr,
          sp, fr, local);
  if (rec) *rec = std::move(local);
  return sp.to_path();
}

Path simulate_tilted(const CoefficientModel& m, const Path& phi,
                     const SimConfig& cfg, std::uint64_t stream,
                     TiltRecord* rec) {
  validate_cfg(cfg);
  validate_target(m, phi, cfg.T);
  if (cfg.tube_gamma < 0.0)
    throw ValidationError("simulate_tilted needs tube_gamma >= 0");
  TargetGrid tg = sample_target(phi, cfg.steps(), cfg.dt, cfg.T);
  ScratchPath sp(cfg.steps() + 1, Interp::kStepRight);
  CumulantFrame fr;
  TiltRecord local;
  run_one(m, &tg, cfg, Mode::kTilted, cfg.tube_gamma, stream, rec != nullptr,
          sp, fr, local);
  if (rec) *rec = std::move(local);
  return sp.to_path();
}

namespace {

struct EnsembleSlots {
  std::vector<double> weight;   // estimator sample per path
  std::vector<double> sup_dev;
  std::vector<std::int8_t> hit;
  std::vector<std::int8_t> valid;
  std::vector<std::int64_t> clamps;
  std::vector<double> pred_qv, real_qv, pred_qv_tau;
};

void run_ensemble(const CoefficientModel& m, const TargetGrid* tg,
                  const SimConfig& cfg, Mode mode, double gamma, double delta,
                  std::int64_t M, int threads, EnsembleSlots& out) {
  const std::size_t msteps = cfg.steps();
  out.weight.assign(M, 0.0);
  out.sup_dev.assign(M, 0.0);
  out.hit.assign(M, 0);
  out.valid.assign(M, 1);
  out.clamps.assign(M, 0);
  out.pred_qv.assign(M, 0.0);
  out.real_qv.assign(M, 0.0);
  out.pred_qv_tau.assign(M, 0.0);

  auto body = [&](std::int64_t i, ScratchPath& sp, CumulantFrame& fr,
                  TiltRecord& rec) {
    run_one(m, tg, cfg, mode, gamma, static_cast<std::uint64_t>(i), false, sp,
            fr, rec);
    bool hit = tg != nullptr && rec.sup_dev <= delta;
    double w = 0.0;
    if (hit) {
      w = (mode == Mode::kTilted) ? std::exp(-rec.log_z) : 1.0;
      if (!std::isfinite(w)) {
        rec.valid = false;
        w = 0.0;
      }
    }
    out.weight[i] = w;
    out.sup_dev[i] = rec.sup_dev;
    out.hit[i] = hit ? 1 : 0;
    out.valid[i] = rec.valid ? 1 : 0;
    out.clamps[i] = rec.clamp_steps;
    out.pred_qv[i] = rec.predicted_qv;
    out.real_qv[i] = rec.realized_qv;
    out.pred_qv_tau[i] = rec.predicted_qv_tau;
  };

#ifdef _OPENMP
  int nthreads = resolve_threads(threads);
#pragma omp parallel num_threads(nthreads)
  {
    ScratchPath sp(msteps + 1, Interp::kStepRight);
    CumulantFrame fr;
    TiltRecord rec;
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < M; ++i) body(i, sp, fr, rec);
  }
#else
  (void)threads;
  ScratchPath sp(msteps + 1, Interp::kStepRight);
  CumulantFrame fr;
  TiltRecord rec;
  for (std::int64_t i = 0; i < M; ++i) body(i, sp, fr, rec);
#endif
}

EstimateReport reduce_estimate(const CoefficientModel& m, const Path& phi,
                               double delta, const SimConfig& cfg,
                               std::int64_t M, Method method, double gamma,
                               const EnsembleSlots& slots) {
  EstimateReport rep;
  rep.method = method == Method::kTilted ? "tilted" : "crude";
  rep.n = cfg.n;
  rep.M = M;
  rep.dt = cfg.dt;
  rep.delta = delta;
  rep.gamma = gamma;
  rep.gamma_below_delta = method == Method::kTilted && gamma < delta;

  std::vector<double> w, w2;
  w.reserve(M);
  w2.reserve(M);
  std::int64_t valid = 0, hits = 0;
  for (std::int64_t i = 0; i < M; ++i) {
    rep.clamp_count += slots.clamps[i];
    if (!slots.valid[i]) {
      ++rep.invalid_paths;
      continue;
    }
    ++valid;
    hits += slots.hit[i];
    w.push_back(slots.weight[i]);
    w2.push_back(slots.weight[i] * slots.weight[i]);
  }
  if (valid == 0) throw ValidationError("no valid sample paths");
  double vm = static_cast<double>(valid);
  double raw_mean = neumaier(w) / vm;
  rep.hit_fraction = static_cast<double>(hits) / vm;
  double var = valid > 1
                   ? std::max(0.0, (neumaier(w2) - vm * raw_mean * raw_mean) /
                                       (vm - 1.0))
                   : 0.0;
  rep.std_err = std::sqrt(var / vm);
  // The weighted mean can stray above 1 for near-certain events; projecting
  // onto [0, 1] never hurts an estimator of a probability.
  rep.p_hat = std::min(raw_mean, 1.0);
  rep.log_rate = rep.p_hat > 0.0 ? std::log(rep.p_hat) / cfg.n : -kInf;
  rep.target_rate = rate_I(m, phi, cfg.T, cfg.threads).value;
  return rep;
}

}  // namespace

EstimateReport estimate_tube_probability(const CoefficientModel& m,
                                         const Path& phi, double delta,
                                         const SimConfig& cfg, std::int64_t M,
                                         Method method) {
  validate_cfg(cfg);
  validate_target(m, phi, cfg.T);
  if (!(delta > 0.0)) throw ValidationError("tube radius delta must be > 0");
  if (M < 1) throw ValidationError("need at least one sample path");
  double gamma = cfg.tube_gamma >= 0.0 ? cfg.tube_gamma : 2.0 * delta;
  TargetGrid tg = sample_target(phi, cfg.steps(), cfg.dt, cfg.T);
  EnsembleSlots slots;
  Mode mode = method == Method::kTilted ? Mode::kTilted : Mode::kPlain;
  run_ensemble(m, &tg, cfg, mode, gamma, delta, M, cfg.threads, slots);
  return reduce_estimate(m, phi, delta, cfg, M, method, gamma, slots);
}

EstimateReport estimate_tube_probability_serial(const CoefficientModel& m,
                                                const Path& phi, double delta,
                                                const SimConfig& cfg,
                                                std::int64_t M, Method method) {
  validate_cfg(cfg);
  validate_target(m, phi, cfg.T);
  if (!(delta > 0.0)) throw ValidationError("tube radius delta must be > 0");
  if (M < 1) throw ValidationError("need at least one sample path");
  double gamma = cfg.tube_gamma >= 0.0 ? cfg.tube_gamma : 2.0 * delta;
  TargetGrid tg = sample_target(phi, cfg.steps(), cfg.dt, cfg.T);

  // Plain loop, no scheduling: the reference the parallel path must match.
  EnsembleSlots slots;
  const std::size_t msteps = cfg.steps();
  slots.weight.assign(M, 0.0);
  slots.sup_dev.assign(M, 0.0);
  slots.hit.assign(M, 0);
  slots.valid.assign(M, 1);
  slots.clamps.assign(M, 0);
  slots.pred_qv.assign(M, 0.0);
  slots.real_qv.assign(M, 0.0);
  slots.pred_qv_tau.assign(M, 0.0);
  ScratchPath sp(msteps + 1, Interp::kStepRight);
  CumulantFrame fr;
  TiltRecord rec;
  Mode mode = method == Method::kTilted ? Mode::kTilted : Mode::kPlain;
  for (std::int64_t i = 0; i < M; ++i) {
    run_one(m, &tg, cfg, mode, gamma, static_cast<std::uint64_t>(i), false, sp,
            fr, rec);
    bool hit = rec.sup_dev <= delta;
    double w = 0.0;
    if (hit) {
      w = (mode == Mode::kTilted) ? std::exp(-rec.log_z) : 1.0;
      if (!std::isfinite(w)) {
        rec.valid = false;
        w = 0.0;
      }
    }
    slots.weight[i] = w;
    slots.sup_dev[i] = rec.sup_dev;
    slots.hit[i] = hit ? 1 : 0;
    slots.valid[i] = rec.valid ? 1 : 0;
    slots.clamps[i] = rec.clamp_steps;
  }
  return reduce_estimate(m, phi, delta, cfg, M, method, gamma, slots);
}

std::vector<double> ensemble_sup_deviation(const CoefficientModel& m,
                                           const Path& target,
                                           const SimConfig& cfg,
                                           std::int64_t M) {
  validate_cfg(cfg);
  if (target.end_time() < cfg.T - 1e-12)
    throw ValidationError("target path ends before the horizon");
  TargetGrid tg = sample_target(target, cfg.steps(), cfg.dt, cfg.T);
  EnsembleSlots slots;
  run_ensemble(m, &tg, cfg, Mode::kPlain, 0.0, kInf, M, cfg.threads, slots);
  return slots.sup_dev;
}

QvReport quadratic_variation_diag(const CoefficientModel& m, const Path& phi,
                                  const SimConfig& cfg, std::int64_t M) {
  validate_cfg(cfg);
  validate_target(m, phi, cfg.T);
  if (cfg.tube_gamma < 0.0)
    throw ValidationError("quadratic_variation_diag needs tube_gamma >= 0");
  TargetGrid tg = sample_target(phi, cfg.steps(), cfg.dt, cfg.T);
  EnsembleSlots slots;
  run_ensemble(m, &tg, cfg, Mode::kTilted, cfg.tube_gamma, kInf, M,
               cfg.threads, slots);
  QvReport rep;
  rep.M = M;
  double pred = neumaier(slots.pred_qv);
  double real = neumaier(slots.real_qv);
  rep.predicted_mean = pred / static_cast<double>(M);
  rep.realized_mean = real / static_cast<double>(M);
  rep.ratio = pred > 0.0 ? real / pred : 0.0;
  double max_tau = 0.0;
  for (double v : slots.pred_qv_tau) max_tau = std::max(max_tau, v);
  rep.k_hat = cfg.n * max_tau;
  return rep;
}

}  // namespace ldp
