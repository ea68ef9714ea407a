#include "ldp/model.hpp"

#include <algorithm>
#include <cmath>

#include "ldp/errors.hpp"

namespace ldp {

namespace {
constexpr double kExpCap = 700.0;
}

double CoefficientModel::drift(double t, const HistoryView& x) const {
  double v = a(t, x);
  if (growth_checks) {
    double cap = l(t) * (1.0 + x.left_sup_abs());
    if (std::abs(v) > cap * (1.0 + 1e-9) + 1e-300)
      throw GrowthViolation("drift breaks linear-growth envelope at t=" +
                            std::to_string(t));
  }
  return v;
}

double CoefficientModel::diffusion(double t, const HistoryView& x) const {
  double v = b(t, x);
  if (growth_checks) {
    double cap = l(t) * (1.0 + x.left_sup_abs());
    if (v * v > cap * (1.0 + 1e-9) + 1e-300)
      throw GrowthViolation("diffusion^2 breaks linear-growth envelope at t=" +
                            std::to_string(t));
  }
  return v;
}

double CoefficientModel::jump(double t, const HistoryView& x, double u) const {
  double v = f(t, x, u);
  if (growth_checks) {
    double cap = h(u) * l(t) * (1.0 + x.left_sup_abs());
    if (std::abs(v) > cap * (1.0 + 1e-9) + 1e-300)
      throw GrowthViolation("jump size breaks linear-growth envelope at t=" +
                            std::to_string(t));
  }
  return v;
}

CoefficientModel CoefficientModel::with_growth_checks() const {
  CoefficientModel copy = *this;
  copy.growth_checks = true;
  return copy;
}

CoefficientModel make_model(std::string name, double x0, DriftFn a,
                            DiffusionFn b, JumpFn f, JumpMeasure q,
                            EnvelopeFn l, EnvelopeFn h) {
  if (!std::isfinite(x0)) throw ValidationError("x0 must be finite");
  if (!a || !b) throw ValidationError("model needs drift and diffusion evaluators");
  if (!q.empty() && !f)
    throw ValidationError("jump measure present but no jump evaluator");
  if (!l) throw ValidationError("model needs the envelope l(t)");
  if (!q.empty() && !h)
    throw ValidationError("jump measure present but no mark envelope h(u)");
  CoefficientModel m;
  m.name = std::move(name);
  m.x0 = x0;
  m.a = std::move(a);
  m.b = std::move(b);
  m.f = std::move(f);
  m.q = std::move(q);
  m.l = std::move(l);
  m.h = h ? std::move(h) : EnvelopeFn([](double) { return 0.0; });
  return m;
}

double cramer_K(const CoefficientModel& m, double lambda) {
  double acc = 0.0;
  for (const auto& p : m.q.points()) {
    double z = lambda * m.h(p.u);
    if (z > kExpCap)
      throw CumulantOverflow("exponential moment overflow in K at lambda=" +
                             std::to_string(lambda));
    acc += p.w * (std::expm1(z) - z);
  }
  return acc;
}

GrowthReport check_linear_growth(const CoefficientModel& m, const Path& x,
                                 int samples) {
  GrowthReport rep;
  double T = x.end_time();
  for (int i = 0; i < samples; ++i) {
    double t = T * (static_cast<double>(i) + 0.5) / samples;
    HistoryView v = x.history(t);
    double cap = m.l(t) * (1.0 + v.left_sup_abs());
    auto consider = [&](double mag, const char* which) {
      double ratio = (mag == 0.0) ? 0.0 : mag / std::max(cap, 1e-300);
      if (ratio > rep.max_ratio) {
        rep.max_ratio = ratio;
        rep.worst_time = t;
        rep.worst_coefficient = which;
      }
    };
    consider(std::abs(m.a(t, v)), "a");
    double bb = m.b(t, v);
    consider(bb * bb, "b^2");
    for (const auto& p : m.q.points()) {
      double fv = std::abs(m.f(t, v, p.u));
      double fcap = m.h(p.u) * m.l(t) * (1.0 + v.left_sup_abs());
      double ratio = (fv == 0.0) ? 0.0 : fv / std::max(fcap, 1e-300);
      if (ratio > rep.max_ratio) {
        rep.max_ratio = ratio;
        rep.worst_time = t;
        rep.worst_coefficient = "f";
      }
    }
  }
  rep.pass = rep.max_ratio <= 1.0 + 1e-9;
  return rep;
}

ContinuityReport check_c_continuity(const CoefficientModel& m,
                                    const std::vector<Path>& probes,
                                    const Path& limit, int time_samples) {
  ContinuityReport rep;
  double T = limit.end_time();
  for (const Path& p : probes) {
    double dev = 0.0;
    for (int i = 0; i < time_samples; ++i) {
      double t = T * (static_cast<double>(i) + 0.5) / time_samples;
      HistoryView vp = p.history(t);
      HistoryView vl = limit.history(t);
      dev = std::max(dev, std::abs(m.a(t, vp) - m.a(t, vl)));
      dev = std::max(dev, std::abs(m.b(t, vp) - m.b(t, vl)));
      for (const auto& at : m.q.points())
        dev = std::max(dev, std::abs(m.f(t, vp, at.u) - m.f(t, vl, at.u)));
    }
    rep.deviations.push_back(dev);
  }
  // Shrinking probes should drive the deviations down; compare the back half
  // against the front half so one noisy entry cannot flip the verdict.
  if (!rep.deviations.empty()) {
    std::size_t half = rep.deviations.size() / 2;
    double front = 0.0, back = 0.0;
    for (std::size_t i = 0; i < rep.deviations.size(); ++i) {
      if (i < half || rep.deviations.size() == 1)
        front = std::max(front, rep.deviations[i]);
      if (i >= half) back = std::max(back, rep.deviations[i]);
    }
    rep.trend_pass = back <= 1e-12 || back <= 0.6 * front;
  }
  return rep;
}

}  // namespace ldp
