#include "ldp/metric.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ldp/errors.hpp"
#include "ldp/rng.hpp"

namespace ldp {

namespace {

// Warped evaluation time u * g_k(u): identity up to k, tapered back to zero
// on (k, k+1], zero beyond.
double taper_time(double u, int k) {
  if (u <= k) return std::max(u, 0.0);
  if (u <= k + 1.0) return u * (k + 1.0 - u);
  return 0.0;
}

// Compressed trajectory on [0, 1]: t -> x(alpha(t) g_k(alpha(t))) with the
// forced zero at t = 1.
struct Compressed {
  const Path* p;
  int k;

  double at(double t) const {
    if (t >= 1.0) return 0.0;
    double alpha = -std::log1p(-t);
    return p->value_at(taper_time(alpha, k));
  }
};

double modulus_on_samples(const std::vector<double>& v, int gap) {
  // max |v_i - v_j| over |i - j| <= gap
  double w = 0.0;
  int n = static_cast<int>(v.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j <= std::min(i + gap, n - 1); ++j)
      w = std::max(w, std::abs(v[i] - v[j]));
  return w;
}

}  // namespace

double sup_distance(const Path& x, const Path& y, double T) {
  std::set<double> knots{0.0, T};
  for (double t : x.times())
    if (t > 0.0 && t < T) knots.insert(t);
  for (double t : y.times())
    if (t > 0.0 && t < T) knots.insert(t);

  std::vector<double> ks(knots.begin(), knots.end());
  double sup = 0.0;
  for (std::size_t i = 0; i + 1 < ks.size(); ++i) {
    double s = ks[i], e = ks[i + 1];
    sup = std::max(sup, std::abs(x.value_at(s) - y.value_at(s)));
    // Left limit at the cell end: for step paths the cell-start value (the
    // midpoint samples it, also on the frozen tail), for polygons the value
    // at the end itself.
    double xl = x.interp() == Interp::kStepRight ? x.value_at(0.5 * (s + e))
                                                 : x.value_at(e);
    double yl = y.interp() == Interp::kStepRight ? y.value_at(0.5 * (s + e))
                                                 : y.value_at(e);
    sup = std::max(sup, std::abs(xl - yl));
  }
  sup = std::max(sup, std::abs(x.value_at(T) - y.value_at(T)));
  return sup;
}

MetricEstimate skorokhod_rho(const Path& x, const Path& y, int K,
                             int resolution) {
  if (K < 1 || resolution < 2)
    throw ValidationError("skorokhod_rho needs K >= 1, resolution >= 2");
  MetricEstimate est;
  est.resolution = resolution;

  // Upper: sup-norm envelope, one term per horizon level.
  est.upper = kInf;
  for (int k = 1; k <= K; ++k) {
    double bound = sup_distance(x, y, static_cast<double>(k + 1)) +
                   std::pow(2.0, -k);
    est.upper = std::min(est.upper, bound);
  }

  // Lower: per level, grid-search one-knee time changes on the compressed
  // pair, scanning both directions, then subtract the sampling slack.
  const int S = std::max(resolution * 8, 64);  // samples of [0, 1]
  double lower = 0.0;
  for (int k = 1; k <= K; ++k) {
    Compressed cx{&x, k}, cy{&y, k};
    std::vector<double> sx(S + 1), sy(S + 1), ts(S + 1);
    for (int i = 0; i <= S; ++i) {
      ts[i] = static_cast<double>(i) / S;
      sx[i] = cx.at(ts[i]);
      sy[i] = cy.at(ts[i]);
    }
    auto sample = [&](const std::vector<double>& v, double t) {
      double pos = std::clamp(t, 0.0, 1.0) * S;
      int i = std::min(static_cast<int>(pos), S - 1);
      double w = pos - i;
      return v[i] + w * (v[i + 1] - v[i]);
    };
    auto objective = [&](const std::vector<double>& a,
                         const std::vector<double>& b, double p, double q) {
      // mu: (0,0) -> (p,q) -> (1,1); log-slope cost has a closed form.
      double cost = std::max(std::abs(std::log(q / p)),
                             std::abs(std::log((1.0 - q) / (1.0 - p))));
      double sup = 0.0;
      for (int i = 0; i <= S; ++i) {
        double t = ts[i];
        double mu = t <= p ? q * t / p : q + (1.0 - q) * (t - p) / (1.0 - p);
        sup = std::max(sup, std::abs(a[i] - sample(b, mu)));
      }
      return sup + cost;
    };
    double best = kInf;
    for (int ip = 1; ip < resolution; ++ip) {
      double p = static_cast<double>(ip) / resolution;
      for (int iq = 1; iq < resolution; ++iq) {
        double q = static_cast<double>(iq) / resolution;
        best = std::min(best, objective(sx, sy, p, q));
        best = std::min(best, objective(sy, sx, p, q));
      }
    }
    // Search slack: what a 2/resolution-size wiggle of the time change can
    // move the objective by, bounded through the sampled moduli.
    int gap = std::max(1, 2 * S / resolution);
    double slack = modulus_on_samples(sx, gap) + modulus_on_samples(sy, gap) +
                   4.0 / resolution;
    double rk = std::max(0.0, best - slack);
    lower += std::pow(2.0, -k) * rk / (1.0 + rk);
  }
  est.lower = lower;
  return est;
}

double modulus_Wk(const Path& phi, int k, double sigma, int resolution) {
  if (k < 0 || !(sigma >= 0.0))
    throw ValidationError("modulus_Wk needs k >= 0, sigma >= 0");
  double span = k + 1.0;
  std::set<double> grid{0.0, span};
  int steps = std::max(2, static_cast<int>(std::ceil(span * resolution)));
  for (int i = 1; i < steps; ++i) grid.insert(span * i / steps);
  for (double t : phi.times())
    if (t > 0.0 && t < span) grid.insert(t);

  std::vector<double> us(grid.begin(), grid.end());
  std::vector<double> vals(us.size());
  for (std::size_t i = 0; i < us.size(); ++i)
    vals[i] = phi.value_at(taper_time(us[i], k));

  double w = 0.0;
  for (std::size_t i = 0; i < us.size(); ++i)
    for (std::size_t j = i + 1; j < us.size() && us[j] - us[i] <= sigma; ++j)
      w = std::max(w, std::abs(vals[i] - vals[j]));
  return w;
}

TightnessTables tightness_diagnostics(const CoefficientModel& m,
                                      const std::vector<double>& n_list,
                                      double L,
                                      const std::vector<double>& c_grid,
                                      const std::vector<double>& window_grid,
                                      double eta, std::int64_t M,
                                      const SimConfig& base_cfg) {
  if (n_list.empty() || c_grid.empty() || window_grid.empty() || M < 1)
    throw ValidationError("tightness diagnostics needs nonempty grids, M >= 1");
  TightnessTables tabs;
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    SimConfig cfg = base_cfg;
    cfg.n = n_list[ni];
    cfg.T = L;
    cfg.seed = base_cfg.seed ^ splitmix64(ni + 1);
    const std::size_t msteps = cfg.steps();
    const std::size_t stride = std::max<std::size_t>(1, msteps / 32);
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + 1 <= msteps; s += stride) starts.push_back(s);

    std::vector<std::int64_t> sup_counts(c_grid.size(), 0);
    // Per (window, start time) exceedance counts; the statistic takes the
    // worst start afterwards.
    std::vector<std::vector<std::int64_t>> inc_counts(
        window_grid.size(), std::vector<std::int64_t>(starts.size(), 0));
    for (std::int64_t i = 0; i < M; ++i) {
      Path xp = simulate_path(m, cfg, static_cast<std::uint64_t>(i));
      const auto& vs = xp.values();
      double xstar = 0.0;
      for (double v : vs) xstar = std::max(xstar, std::abs(v));
      for (std::size_t ci = 0; ci < c_grid.size(); ++ci)
        if (xstar >= c_grid[ci]) ++sup_counts[ci];

      for (std::size_t wi = 0; wi < window_grid.size(); ++wi) {
        auto wsteps = static_cast<std::size_t>(
            std::llround(window_grid[wi] / cfg.dt));
        wsteps = std::min(std::max<std::size_t>(wsteps, 1), msteps);
        for (std::size_t si = 0; si < starts.size(); ++si) {
          std::size_t s = starts[si];
          double base = vs[s];
          std::size_t hi = std::min(s + wsteps, msteps);
          for (std::size_t t = s + 1; t <= hi; ++t) {
            if (std::abs(vs[t] - base) >= eta) {
              ++inc_counts[wi][si];
              break;
            }
          }
        }
      }
    }

    auto emit = [&](double xval, std::int64_t count,
                    std::vector<TightnessRow>& rows) {
      TightnessRow row;
      row.n = cfg.n;
      row.x = xval;
      double p = static_cast<double>(count) / static_cast<double>(M);
      row.zero_count = count == 0;
      row.stat = count == 0 ? -kInf : std::log(p) / cfg.n;
      row.se = count == 0
                   ? 0.0
                   : std::sqrt(p * (1.0 - p) / static_cast<double>(M)) /
                         (cfg.n * p);
      rows.push_back(row);
    };
    std::size_t sup_base = tabs.sup_rows.size();
    std::size_t inc_base = tabs.increment_rows.size();
    for (std::size_t ci = 0; ci < c_grid.size(); ++ci)
      emit(c_grid[ci], sup_counts[ci], tabs.sup_rows);
    for (std::size_t wi = 0; wi < window_grid.size(); ++wi) {
      std::int64_t worst = 0;
      for (std::int64_t c : inc_counts[wi]) worst = std::max(worst, c);
      emit(window_grid[wi], worst, tabs.increment_rows);
    }
    // Trend flags within this n block: tails shrink as c grows and as the
    // window shrinks (grids are taken as given, assumed increasing).
    for (std::size_t ci = sup_base + 1; ci < tabs.sup_rows.size(); ++ci)
      if (tabs.sup_rows[ci].stat > tabs.sup_rows[ci - 1].stat + 1e-12)
        tabs.sup_trend_ok = false;
    for (std::size_t wi = inc_base + 1; wi < tabs.increment_rows.size(); ++wi)
      if (tabs.increment_rows[wi].stat <
          tabs.increment_rows[wi - 1].stat - 1e-12)
        tabs.increment_trend_ok = false;
  }
  return tabs;
}

}  // namespace ldp
