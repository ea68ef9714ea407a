#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "ldp/catalogue.hpp"
#include "ldp/errors.hpp"
#include "ldp/model.hpp"

using namespace ldp;

namespace {

CoefficientModel unit_atom_model(double weight) {
  return make_model(
      "unit-atom", 0.0, [](double, const HistoryView&) { return 0.0; },
      [](double, const HistoryView&) { return 0.0; },
      [](double, const HistoryView&, double) { return 1.0; },
      JumpMeasure::atoms({{1.0, weight}}), [](double) { return 1.0; },
      [](double) { return 1.0; });
}

Path ramp(double T, double dt, double x0, double slope) {
  std::vector<double> ts, vs;
  for (double t = 0.0; t < T + 0.5 * dt; t += dt) {
    ts.push_back(t);
    vs.push_back(x0 + slope * t);
  }
  ts.back() = T;
  return Path(std::move(ts), std::move(vs), Interp::kLinear);
}

}  // namespace

TEST_CASE("jump measure construction") {
  CHECK_THROWS_AS(JumpMeasure::atoms({{1.0, -0.5}}), std::invalid_argument);
  JumpMeasure q = JumpMeasure::atoms({{1.0, 0.25}, {-2.0, 0.75}});
  CHECK(q.total_mass() == doctest::Approx(1.0));
  CHECK(q.is_atomic());
  CHECK_FALSE(q.empty());
  CHECK(q.integrate([](double u) { return u; }) ==
        doctest::Approx(0.25 - 1.5));

  // density mass within 1e-12 relative of the analytic integral
  JumpMeasure d = JumpMeasure::density([](double u) { return u * u; }, 0.0,
                                       1.0, 32);
  CHECK_FALSE(d.is_atomic());
  CHECK(d.total_mass() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // sampling follows the CDF
  CHECK(q.sample_mark(0.0) == 1.0);
  CHECK(q.sample_mark(0.2) == 1.0);
  CHECK(q.sample_mark(0.9) == -2.0);
}

TEST_CASE("gauss-legendre nodes integrate polynomials exactly") {
  std::vector<double> x, w;
  gauss_legendre(8, -1.0, 3.0, x, w);
  double m0 = 0.0, m3 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    m0 += w[i];
    m3 += w[i] * x[i] * x[i] * x[i];
  }
  CHECK(m0 == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(m3 == doctest::Approx(20.0).epsilon(1e-13));  // int x^3 over [-1,3]
}

TEST_CASE("cramer_K oracles") {
  CoefficientModel m1 = unit_atom_model(1.0);
  CHECK(cramer_K(m1, 0.0) == 0.0);  // exactly
  CHECK(cramer_K(m1, 1.0) ==
        doctest::Approx(std::exp(1.0) - 2.0).epsilon(1e-14));

  CoefficientModel m2 = unit_atom_model(2.0);
  CHECK(cramer_K(m2, -1.0) ==
        doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("cramer_K convexity and nonnegativity") {
  CoefficientModel m = default_catalogue_model("twosided");
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> lam(-6.0, 6.0), th(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    double l1 = lam(rng), l2 = lam(rng), t = th(rng);
    double lhs = cramer_K(m, t * l1 + (1.0 - t) * l2);
    double rhs = t * cramer_K(m, l1) + (1.0 - t) * cramer_K(m, l2);
    CHECK(lhs <= rhs + 1e-10);
    CHECK(cramer_K(m, l1) >= 0.0);
  }
}

TEST_CASE("cramer_K atomic evaluation is bitwise the explicit sum") {
  CoefficientModel m = default_catalogue_model("twosided");
  for (double lam : {-3.0, -0.5, 0.7, 4.2}) {
    double manual = 0.0;
    for (const auto& at : m.q.points())
      manual += at.w * (std::expm1(lam * m.h(at.u)) - lam * m.h(at.u));
    CHECK(cramer_K(m, lam) == manual);
  }
}

TEST_CASE("linear growth report") {
  Path x({0.0, 0.5, 1.0}, {1.0, 3.0, -2.0}, Interp::kLinear);

  CoefficientModel ok = make_model(
      "neg-feedback", 1.0,
      [](double, const HistoryView& v) { return -v.left_value(); },
      [](double, const HistoryView&) { return 0.0; }, nullptr, JumpMeasure(),
      [](double) { return 1.0; }, [](double) { return 1.0; });
  GrowthReport r1 = check_linear_growth(ok, x, 64);
  CHECK(r1.pass);
  CHECK(r1.max_ratio <= 1.0 + 1e-9);

  CoefficientModel bad = make_model(
      "double", 1.0,
      [](double, const HistoryView& v) { return 2.0 * v.left_value(); },
      [](double, const HistoryView&) { return 0.0; }, nullptr, JumpMeasure(),
      [](double) { return 1.0; }, [](double) { return 1.0; });
  GrowthReport r2 = check_linear_growth(bad, x, 64);
  CHECK_FALSE(r2.pass);
  CHECK(r2.worst_coefficient == "a");

  // equality case |f| = h(u) l (1 + X*)
  CoefficientModel eq = make_model(
      "saturating", 1.0, [](double, const HistoryView&) { return 0.0; },
      [](double, const HistoryView&) { return 0.0; },
      [](double, const HistoryView& v, double u) {
        return u * (1.0 + v.left_sup_abs());
      },
      JumpMeasure::atoms({{0.5, 1.0}, {1.0, 1.0}}),
      [](double) { return 1.0; }, [](double u) { return std::abs(u); });
  GrowthReport r3 = check_linear_growth(eq, x, 64);
  CHECK(r3.pass);
  CHECK(r3.max_ratio == doctest::Approx(1.0));
}

TEST_CASE("growth-checked copy throws on breach") {
  Path x({0.0, 0.5, 1.0}, {1.0, 3.0, -2.0}, Interp::kLinear);
  CoefficientModel bad = make_model(
      "double", 1.0,
      [](double, const HistoryView& v) { return 5.0 * v.left_value(); },
      [](double, const HistoryView&) { return 0.0; }, nullptr, JumpMeasure(),
      [](double) { return 1.0; }, [](double) { return 1.0; });
  CoefficientModel checked = bad.with_growth_checks();
  CHECK_THROWS_AS(checked.drift(0.6, x.history(0.6)), GrowthViolation);
  // the unchecked original stays silent
  CHECK_NOTHROW(bad.drift(0.6, x.history(0.6)));
}

TEST_CASE("c-continuity report") {
  Path limit = ramp(1.0, 0.1, 0.0, 1.0);

  CoefficientModel lip = make_model(
      "identity", 0.0,
      [](double, const HistoryView& v) { return v.left_value(); },
      [](double, const HistoryView&) { return 1.0; }, nullptr, JumpMeasure(),
      [](double) { return 2.0; }, [](double) { return 1.0; });
  std::vector<Path> probes;
  for (int k = 1; k <= 5; ++k) {
    std::vector<double> ts = limit.times(), vs = limit.values();
    for (double& v : vs) v += 1.0 / k;
    probes.emplace_back(std::move(ts), std::move(vs), Interp::kLinear);
  }
  ContinuityReport r = check_c_continuity(lip, probes, limit, 32);
  REQUIRE(r.deviations.size() == 5);
  for (int k = 1; k <= 5; ++k)
    CHECK(r.deviations[k - 1] == doctest::Approx(1.0 / k));
  CHECK(r.trend_pass);

  CoefficientModel cst = make_model(
      "const", 0.0, [](double, const HistoryView&) { return 0.3; },
      [](double, const HistoryView&) { return 1.0; }, nullptr, JumpMeasure(),
      [](double) { return 2.0; }, [](double) { return 1.0; });
  ContinuityReport rc = check_c_continuity(cst, probes, limit, 32);
  for (double d : rc.deviations) CHECK(d == 0.0);
  CHECK(rc.trend_pass);

  // constructed discontinuity: sign of the gap to the limit path
  Path limit_copy = limit;
  CoefficientModel sgn = make_model(
      "sign-gap", 0.0,
      [limit_copy](double t, const HistoryView& v) {
        double d = v.left_value() - limit_copy.value_at(t);
        return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      },
      [](double, const HistoryView&) { return 1.0; }, nullptr, JumpMeasure(),
      [](double) { return 2.0; }, [](double) { return 1.0; });
  ContinuityReport rs = check_c_continuity(sgn, probes, limit, 32);
  CHECK_FALSE(rs.trend_pass);
}

TEST_CASE("predictability: later samples never leak") {
  for (const std::string& name : catalogue_names()) {
    CoefficientModel m = default_catalogue_model(name);
    Path x({0.0, 0.25, 0.5, 0.75, 1.0}, {m.x0, m.x0 + 0.5, m.x0 - 0.25,
                                         m.x0 + 1.0, m.x0},
           Interp::kLinear);
    double t = 0.5;
    HistoryView before = x.history(t);
    double a0 = m.drift(t, before);
    double b0 = m.diffusion(t, before);
    double u = m.q.empty() ? 0.0 : m.q.points().front().u;
    double f0 = m.q.empty() ? 0.0 : m.jump(t, before, u);
    x.set_value(3, 50.0);  // strictly after t
    x.set_value(4, -50.0);
    HistoryView after = x.history(t);
    CHECK(m.drift(t, after) == a0);
    CHECK(m.diffusion(t, after) == b0);
    if (!m.q.empty()) CHECK(m.jump(t, after, u) == f0);
  }
}

TEST_CASE("evaluator purity: repeat calls bit-identical") {
  for (const std::string& name : catalogue_names()) {
    CoefficientModel m = default_catalogue_model(name);
    Path x({0.0, 0.3, 0.8, 1.0}, {m.x0, m.x0 + 1.0, m.x0 - 0.5, m.x0 + 0.25},
           Interp::kLinear);
    for (double t : {0.1, 0.3, 0.9}) {
      HistoryView v = x.history(t);
      CHECK(m.drift(t, v) == m.drift(t, v));
      CHECK(m.diffusion(t, v) == m.diffusion(t, v));
      for (const auto& at : m.q.points())
        CHECK(m.jump(t, v, at.u) == m.jump(t, v, at.u));
    }
  }
}

TEST_CASE("catalogue construction and parameters") {
  CHECK_THROWS_AS(make_catalogue_model("nope", {}, 0.0), ValidationError);
  CHECK_THROWS_AS(make_catalogue_model("bm", {{"zeta", 1.0}}, 0.0),
                  ValidationError);

  CoefficientModel bm = make_catalogue_model("bm", {{"mu", 0.5},
                                                    {"sigma", 2.0}},
                                             1.0);
  Path x = Path::constant(1.0, 0.5, 1.0, Interp::kLinear);
  CHECK(bm.drift(0.5, x.history(0.5)) == 0.5);
  CHECK(bm.diffusion(0.5, x.history(0.5)) == 2.0);
  CHECK(bm.q.empty());

  CoefficientModel ou = make_catalogue_model("ou", {{"theta", 2.0}}, 1.0);
  CHECK(ou.drift(0.5, x.history(0.5)) == -2.0);

  CoefficientModel cp = default_catalogue_model("cpoisson");
  CHECK(cp.q.total_mass() == 1.0);
  CHECK(cp.diffusion(0.1, x.history(0.1)) == 0.0);

  CoefficientModel dj = default_catalogue_model("densjumps");
  CHECK_FALSE(dj.q.is_atomic());
  CHECK(dj.q.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("delayjd drift is the trailing window average") {
  CoefficientModel m = make_catalogue_model(
      "delayjd", {{"kappa", 2.0}, {"tau", 0.5}, {"sigma", 1.0}}, 0.0);
  Path x = ramp(1.0, 0.125, 0.0, 1.0);  // X_t = t
  // average of s over [t - 0.5, t] is t - 0.25
  double t = 0.75;
  CHECK(m.drift(t, x.history(t)) == doctest::Approx(2.0 * (t - 0.25)));
  // early times clip the window at 0: average of s over [0, 0.25] = 0.125
  CHECK(m.drift(0.25, x.history(0.25)) == doctest::Approx(2.0 * 0.125));
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(
      make_model("broken", 0.0, nullptr,
                 [](double, const HistoryView&) { return 1.0; }, nullptr,
                 JumpMeasure(), [](double) { return 1.0; },
                 [](double) { return 1.0; }),
      ValidationError);
  // q carries atoms but f is null
  CHECK_THROWS_AS(
      make_model("broken", 0.0,
                 [](double, const HistoryView&) { return 0.0; },
                 [](double, const HistoryView&) { return 1.0; }, nullptr,
                 JumpMeasure::atoms({{1.0, 1.0}}), [](double) { return 1.0; },
                 [](double) { return 1.0; }),
      ValidationError);
}
