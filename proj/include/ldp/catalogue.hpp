#pragma once

#include <map>
#include <string>
#include <vector>

#include "ldp/model.hpp"

namespace ldp {

// Built-in models addressable by name from configs and tests.
//
//   bm        drift mu, diffusion sigma, no jumps
//   ou        mean-reverting drift -theta * X_{t-}, diffusion sigma, no jumps
//   cpoisson  compensated Poisson: a = 0, b = 0, f == jump, one atom of mass `mass`
//   twosided  a = 0, diffusion sigma, f(t,X,u) = u with atoms at +1 (wplus)
//             and -1 (wminus)
//   delayjd   jump-diffusion whose drift is kappa * (mean of X over the last
//             `tau` time units); diffusion sigma, same two-sided atoms
//   densjumps a = 0, diffusion sigma, f(t,X,u) = u, q = uniform density of
//             total mass `mass` on [0.5, 1.5]
//
// Unknown model names and unknown parameter keys are rejected.
CoefficientModel make_catalogue_model(
    const std::string& name, const std::map<std::string, double>& params,
    double x0);

// Convenience factories with explicit parameters.
CoefficientModel bm_model(double mu, double sigma, double x0);
CoefficientModel ou_model(double theta, double sigma, double x0);
CoefficientModel cpoisson_model(double jump, double mass, double x0);
CoefficientModel twosided_model(double sigma, double wplus, double wminus,
                                double x0);
CoefficientModel delayjd_model(double kappa, double tau, double sigma,
                               double wplus, double wminus, double x0);
CoefficientModel densjumps_model(double mass, double sigma, double x0);

// Names of every catalogue entry (used by sweep-all-models tests/diagnostics).
const std::vector<std::string>& catalogue_names();

// Default-parameter instance for a catalogue name.
CoefficientModel default_catalogue_model(const std::string& name);

}  // namespace ldp
