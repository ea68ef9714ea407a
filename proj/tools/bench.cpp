// Times the tube-probability estimator: serial reference vs the OpenMP
// ensemble kernel.  Both produce bit-identical reports; the benchmark prints
// wall times, paths/s and the speedup.
//
// usage: ldp_bench [M] [threads]

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "ldp/catalogue.hpp"
#include "ldp/simulate.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  std::int64_t M = argc > 1 ? std::atoll(argv[1]) : 20000;
  int threads = argc > 2 ? std::atoi(argv[2]) : 0;
  if (M < 1) {
    std::fprintf(stderr, "usage: ldp_bench [M >= 1] [threads]\n");
    return 2;
  }

  ldp::CoefficientModel m = ldp::bm_model(0.0, 1.0, 0.0);
  std::vector<double> ts, vs;
  const int cells = 100;
  for (int i = 0; i <= cells; ++i) {
    ts.push_back(i / static_cast<double>(cells));
    vs.push_back(ts.back());
  }
  ldp::Path phi(std::move(ts), std::move(vs), ldp::Interp::kLinear);

  ldp::SimConfig cfg;
  cfg.n = 64;
  cfg.T = 1.0;
  cfg.dt = 1e-2;
  cfg.seed = 20250825;
  cfg.tube_gamma = 0.5;
  cfg.threads = threads;

  std::printf("tube estimator, bm model, n=%g, M=%lld, dt=%g, threads=%d\n",
              cfg.n, static_cast<long long>(M), cfg.dt,
              cfg.threads <= 0 ? -1 : cfg.threads);

  auto t0 = Clock::now();
  ldp::EstimateReport serial = ldp::estimate_tube_probability_serial(
      m, phi, 0.25, cfg, M, ldp::Method::kTilted);
  double dt_serial = seconds_since(t0);

  t0 = Clock::now();
  ldp::EstimateReport par = ldp::estimate_tube_probability(
      m, phi, 0.25, cfg, M, ldp::Method::kTilted);
  double dt_par = seconds_since(t0);

  std::printf("  serial : %8.3f s  (%.0f paths/s)\n", dt_serial,
              M / dt_serial);
  std::printf("  openmp : %8.3f s  (%.0f paths/s)\n", dt_par, M / dt_par);
  std::printf("  speedup: %8.2fx\n", dt_serial / dt_par);

  bool same = serial.p_hat == par.p_hat && serial.std_err == par.std_err &&
              serial.hit_fraction == par.hit_fraction;
  std::printf("  p_hat  : %.12g (serial) vs %.12g (openmp) -> %s\n",
              serial.p_hat, par.p_hat,
              same ? "identical" : "MISMATCH");
  return same ? 0 : 1;
}
