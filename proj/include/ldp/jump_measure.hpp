#pragma once

#include <functional>
#include <vector>

namespace ldp {

// Finite measure q on the mark space E, either a list of weighted atoms or a
// density on a bounded interval.  Densities are reduced to Gauss-Legendre
// node/weight pairs at construction, so downstream integration is a plain
// weighted sum either way.  Total mass must be finite; that is what keeps the
// exponential moment condition checkable on a lambda grid.
class JumpMeasure {
 public:
  struct Atom {
    double u;  // mark
    double w;  // weight, >= 0
  };

  JumpMeasure() = default;  // empty measure (no jumps)

  static JumpMeasure atoms(std::vector<Atom> atoms);
  static JumpMeasure density(const std::function<double(double)>& dens,
                             double lo, double hi, int nodes = 64);

  double total_mass() const { return mass_; }
  bool is_atomic() const { return atomic_; }
  bool empty() const { return points_.empty(); }

  // Atoms for atomic measures, quadrature node/weight pairs for densities.
  const std::vector<Atom>& points() const { return points_; }

  // Integral of phi against q.  Exact (term-by-term) for atomic measures.
  template <class F>
  double integrate(F&& phi) const {
    double acc = 0.0;
    for (const Atom& a : points_) acc += a.w * phi(a.u);
    return acc;
  }

  // Sample a mark from the normalized measure given a uniform in [0,1).
  // Atoms: inverse CDF over weights.  Densities: inverse CDF interpolated on
  // the quadrature partition.
  double sample_mark(double uniform01) const;

 private:
  std::vector<Atom> points_;
  std::vector<double> cdf_;  // cumulative weights / mass
  double mass_ = 0.0;
  bool atomic_ = true;
};

// Nodes and weights of n-point Gauss-Legendre quadrature on [lo, hi].
void gauss_legendre(int n, double lo, double hi, std::vector<double>& x,
                    std::vector<double>& w);

}  // namespace ldp
