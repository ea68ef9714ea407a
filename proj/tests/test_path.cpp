#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "ldp/path.hpp"

using namespace ldp;

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Path({0.1, 1.0}, {0.0, 1.0}, Interp::kLinear),
                  std::invalid_argument);
  CHECK_THROWS_AS(Path({0.0, 1.0, 1.0}, {0.0, 1.0, 2.0}, Interp::kLinear),
                  std::invalid_argument);
  CHECK_THROWS_AS(Path({0.0, 0.5}, {0.0, std::nan("")}, Interp::kLinear),
                  std::invalid_argument);
  CHECK_THROWS_AS(Path({0.0}, {1.0}, Interp::kLinear), std::invalid_argument);
  CHECK_THROWS_AS(Path({0.0, 1.0}, {1.0}, Interp::kLinear),
                  std::invalid_argument);
}

TEST_CASE("constant path") {
  Path p = Path::constant(1.0, 0.25, 2.5, Interp::kLinear);
  CHECK(p.size() == 5);
  CHECK(p.x0() == 2.5);
  CHECK(p.end_time() == 1.0);
  CHECK(p.value_at(0.3) == 2.5);
  CHECK_THROWS_AS(Path::constant(1.0, 0.3, 0.0, Interp::kLinear),
                  std::invalid_argument);
}

TEST_CASE("interpolation rules and freezing") {
  Path lin({0.0, 1.0, 2.0}, {0.0, 2.0, 1.0}, Interp::kLinear);
  CHECK(lin.value_at(0.5) == doctest::Approx(1.0));
  CHECK(lin.value_at(1.5) == doctest::Approx(1.5));
  CHECK(lin.value_at(5.0) == 1.0);  // frozen past the end
  CHECK(lin.value_at(-1.0) == 0.0);
  CHECK(lin.slope_at(0.5) == doctest::Approx(2.0));
  CHECK(lin.slope_at(1.5) == doctest::Approx(-1.0));
  CHECK(lin.cell_index(0.0) == 0);
  CHECK(lin.cell_index(1.0) == 1);
  CHECK(lin.cell_index(2.0) == 1);  // clamped to the last cell

  Path stp({0.0, 1.0, 2.0}, {0.0, 2.0, 1.0}, Interp::kStepRight);
  CHECK(stp.value_at(0.5) == 0.0);
  CHECK(stp.value_at(1.0) == 2.0);
  CHECK(stp.value_at(1.99) == 2.0);
  CHECK(stp.value_at(2.0) == 1.0);
}

TEST_CASE("history snapshot is immune to later mutation") {
  Path p({0.0, 0.5, 1.0, 1.5}, {1.0, -3.0, 0.5, 4.0}, Interp::kLinear);
  HistoryView v = p.history(1.0);
  CHECK(v.end_time() == 1.0);
  CHECK(v.left_value() == 0.5);
  CHECK(v.left_sup_abs() == 3.0);
  CHECK(v.x0() == 1.0);

  double before = v.value_at(0.75);
  p.set_value(3, -100.0);  // strictly after the view's end
  CHECK(v.value_at(0.75) == before);
  CHECK(v.left_value() == 0.5);
  CHECK(v.left_sup_abs() == 3.0);
}

TEST_CASE("history between grid points interpolates to the end") {
  Path p({0.0, 1.0}, {0.0, 2.0}, Interp::kLinear);
  HistoryView v = p.history(0.5);
  CHECK(v.end_time() == 0.5);
  CHECK(v.left_value() == doctest::Approx(1.0));
  CHECK(v.value_at(0.25) == doctest::Approx(0.5));
}

TEST_CASE("average_on closed forms") {
  Path line({0.0, 1.0}, {0.0, 1.0}, Interp::kLinear);
  HistoryView lv = line.history(1.0);
  CHECK(lv.average_on(0.0, 1.0) == doctest::Approx(0.5));
  CHECK(lv.average_on(0.25, 0.75) == doctest::Approx(0.5));
  CHECK(lv.average_on(0.5, 0.5) == doctest::Approx(0.5));  // empty window

  Path stp({0.0, 0.5, 1.0}, {1.0, 3.0, 3.0}, Interp::kStepRight);
  HistoryView sv = stp.history(1.0);
  // value 1 on [0, 0.5), 3 on [0.5, 1): mean over [0,1] = 2
  CHECK(sv.average_on(0.0, 1.0) == doctest::Approx(2.0));
  CHECK(sv.average_on(0.0, 0.5) == doctest::Approx(1.0));

  // multi-knot polygon: 0 -> 2 -> 0, mean = 1
  Path tent({0.0, 1.0, 2.0}, {0.0, 2.0, 0.0}, Interp::kLinear);
  CHECK(tent.history(2.0).average_on(0.0, 2.0) == doctest::Approx(1.0));
}

TEST_CASE("scratch path") {
  ScratchPath sp(8, Interp::kLinear);
  sp.reset(1.0);
  sp.commit(0.5, -2.0);
  sp.commit(1.0, 0.25);
  CHECK(sp.committed() == 3);
  CHECK(sp.last_time() == 1.0);
  CHECK(sp.last_value() == 0.25);
  CHECK(sp.sup_abs() == 2.0);

  HistoryView v = sp.view();
  CHECK(v.end_time() == 1.0);
  CHECK(v.left_value() == 0.25);
  CHECK(v.value_at(0.25) == doctest::Approx(-0.5));

  // provisional probe beyond the committed prefix
  sp.set_provisional(1.25, 4.0);
  HistoryView pv = sp.view();
  CHECK(pv.end_time() == 1.25);
  CHECK(pv.left_value() == 4.0);
  CHECK(pv.left_sup_abs() == 4.0);
  CHECK(pv.value_at(1.125) == doctest::Approx(0.5 * (0.25 + 4.0)));
  sp.clear_provisional();
  CHECK(sp.view().end_time() == 1.0);

  Path p = sp.to_path();
  CHECK(p.size() == 3);
  CHECK(p.values()[1] == -2.0);

  // reuse after reset
  sp.reset(0.0);
  CHECK(sp.committed() == 1);
  CHECK(sp.sup_abs() == 0.0);
}

TEST_CASE("running sup tracks history prefix") {
  Path p({0.0, 1.0, 2.0, 3.0}, {0.0, -5.0, 1.0, 2.0}, Interp::kLinear);
  CHECK(p.history(0.0).left_sup_abs() == 0.0);
  CHECK(p.history(1.0).left_sup_abs() == 5.0);
  CHECK(p.history(3.0).left_sup_abs() == 5.0);
  // mid-cell: interpolated end value participates
  CHECK(p.history(0.5).left_sup_abs() == doctest::Approx(2.5));
}
