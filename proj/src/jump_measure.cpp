#include "ldp/jump_measure.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ldp {

void gauss_legendre(int n, double lo, double hi, std::vector<double>& x,
                    std::vector<double>& w) {
  if (n < 1) throw std::invalid_argument("quadrature needs >= 1 node");
  x.resize(n);
  w.resize(n);
  // Roots of P_n by Newton iteration from the Chebyshev-like initial guess.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    double xm = 0.5 * (hi + lo), xl = 0.5 * (hi - lo);
    x[i] = xm - xl * z;
    x[n - 1 - i] = xm + xl * z;
    w[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

JumpMeasure JumpMeasure::atoms(std::vector<Atom> atoms) {
  JumpMeasure q;
  q.atomic_ = true;
  q.points_ = std::move(atoms);
  for (const Atom& a : q.points_) {
    if (!std::isfinite(a.u) || !std::isfinite(a.w) || a.w < 0.0)
      throw std::invalid_argument("jump atom needs finite mark, weight >= 0");
    q.mass_ += a.w;
    q.cdf_.push_back(q.mass_);
  }
  return q;
}

JumpMeasure JumpMeasure::density(const std::function<double(double)>& dens,
                                 double lo, double hi, int nodes) {
  if (!(hi > lo)) throw std::invalid_argument("density support must be an interval");
  JumpMeasure q;
  q.atomic_ = false;
  std::vector<double> x, w;
  gauss_legendre(nodes, lo, hi, x, w);
  for (int i = 0; i < nodes; ++i) {
    double d = dens(x[i]);
    if (!std::isfinite(d) || d < 0.0)
      throw std::invalid_argument("density must be finite and >= 0 on its support");
    q.points_.push_back({x[i], w[i] * d});
    q.mass_ += w[i] * d;
    q.cdf_.push_back(q.mass_);
  }
  return q;
}

double JumpMeasure::sample_mark(double uniform01) const {
  if (points_.empty() || mass_ <= 0.0)
    throw std::logic_error("cannot sample from an empty measure");
  double target = uniform01 * mass_;
  std::size_t i = 0;
  while (i + 1 < cdf_.size() && cdf_[i] <= target) ++i;
  return points_[i].u;
}

}  // namespace ldp
