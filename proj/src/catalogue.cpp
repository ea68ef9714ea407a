#include "ldp/catalogue.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ldp/errors.hpp"

namespace ldp {

namespace {

double take(const std::map<std::string, double>& params, const std::string& key,
            double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::map<std::string, double>& params,
                    std::set<std::string> allowed, const std::string& name) {
  for (const auto& [k, v] : params) {
    (void)v;
    if (!allowed.count(k))
      throw ValidationError("unknown parameter '" + k + "' for model " + name);
  }
}

EnvelopeFn const_env(double c) {
  return [c](double) { return c; };
}

}  // namespace

CoefficientModel bm_model(double mu, double sigma, double x0) {
  double le = std::max({std::abs(mu), sigma * sigma, 1e-12});
  return make_model(
      "bm", x0, [mu](double, const HistoryView&) { return mu; },
      [sigma](double, const HistoryView&) { return sigma; }, nullptr,
      JumpMeasure(), const_env(le), nullptr);
}

CoefficientModel ou_model(double theta, double sigma, double x0) {
  double le = std::max({std::abs(theta), sigma * sigma, 1e-12});
  return make_model(
      "ou", x0,
      [theta](double, const HistoryView& x) { return -theta * x.left_value(); },
      [sigma](double, const HistoryView&) { return sigma; }, nullptr,
      JumpMeasure(), const_env(le), nullptr);
}

CoefficientModel cpoisson_model(double jump, double mass, double x0) {
  JumpMeasure q = JumpMeasure::atoms({{1.0, mass}});
  double aj = std::abs(jump);
  return make_model(
      "cpoisson", x0, [](double, const HistoryView&) { return 0.0; },
      [](double, const HistoryView&) { return 0.0; },
      [jump](double, const HistoryView&, double) { return jump; }, std::move(q),
      const_env(std::max(aj, 1e-12)), const_env(1.0));
}

CoefficientModel twosided_model(double sigma, double wplus, double wminus,
                                double x0) {
  JumpMeasure q = JumpMeasure::atoms({{1.0, wplus}, {-1.0, wminus}});
  double le = std::max(sigma * sigma, 1.0);
  return make_model(
      "twosided", x0, [](double, const HistoryView&) { return 0.0; },
      [sigma](double, const HistoryView&) { return sigma; },
      [](double, const HistoryView&, double u) { return u; }, std::move(q),
      const_env(le), [](double u) { return std::abs(u); });
}

CoefficientModel delayjd_model(double kappa, double tau, double sigma,
                               double wplus, double wminus, double x0) {
  if (!(tau > 0.0)) throw ValidationError("delayjd needs tau > 0");
  JumpMeasure q = JumpMeasure::atoms({{1.0, wplus}, {-1.0, wminus}});
  double le = std::max({std::abs(kappa), sigma * sigma, 1.0});
  // Trailing-window mean of the path; the window is empty at t = 0 where the
  // mean degenerates to the current value.
  DriftFn a = [kappa, tau](double t, const HistoryView& x) {
    double s0 = std::max(0.0, t - tau);
    return kappa * x.average_on(s0, t);
  };
  return make_model(
      "delayjd", x0, std::move(a),
      [sigma](double, const HistoryView&) { return sigma; },
      [](double, const HistoryView&, double u) { return u; }, std::move(q),
      const_env(le), [](double u) { return std::abs(u); });
}

CoefficientModel densjumps_model(double mass, double sigma, double x0) {
  JumpMeasure q = JumpMeasure::density([mass](double) { return mass; }, 0.5, 1.5);
  double le = std::max(sigma * sigma, 1.5);
  return make_model(
      "densjumps", x0, [](double, const HistoryView&) { return 0.0; },
      [sigma](double, const HistoryView&) { return sigma; },
      [](double, const HistoryView&, double u) { return u; }, std::move(q),
      const_env(le), [](double u) { return std::abs(u); });
}

CoefficientModel make_catalogue_model(
    const std::string& name, const std::map<std::string, double>& params,
    double x0) {
  if (name == "bm") {
    reject_unknown(params, {"mu", "sigma"}, name);
    return bm_model(take(params, "mu", 0.0), take(params, "sigma", 1.0), x0);
  }
  if (name == "ou") {
    reject_unknown(params, {"theta", "sigma"}, name);
    return ou_model(take(params, "theta", 1.0), take(params, "sigma", 1.0), x0);
  }
  if (name == "cpoisson") {
    reject_unknown(params, {"jump", "mass"}, name);
    return cpoisson_model(take(params, "jump", 1.0), take(params, "mass", 1.0),
                          x0);
  }
  if (name == "twosided") {
    reject_unknown(params, {"sigma", "wplus", "wminus"}, name);
    return twosided_model(take(params, "sigma", 0.5),
                          take(params, "wplus", 1.0),
                          take(params, "wminus", 1.0), x0);
  }
  if (name == "delayjd") {
    reject_unknown(params, {"kappa", "tau", "sigma", "wplus", "wminus"}, name);
    return delayjd_model(take(params, "kappa", 0.5), take(params, "tau", 0.25),
                         take(params, "sigma", 1.0),
                         take(params, "wplus", 0.5),
                         take(params, "wminus", 0.5), x0);
  }
  if (name == "densjumps") {
    reject_unknown(params, {"mass", "sigma"}, name);
    return densjumps_model(take(params, "mass", 1.0),
                           take(params, "sigma", 0.5), x0);
  }
  throw ValidationError("unknown model name '" + name + "'");
}

const std::vector<std::string>& catalogue_names() {
  static const std::vector<std::string> names = {
      "bm", "ou", "cpoisson", "twosided", "delayjd", "densjumps"};
  return names;
}

CoefficientModel default_catalogue_model(const std::string& name) {
  if (name == "ou" || name == "bm") return make_catalogue_model(name, {}, 1.0);
  return make_catalogue_model(name, {}, 0.0);
}

}  // namespace ldp
