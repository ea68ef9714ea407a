#pragma once

#include <stdexcept>
#include <string>

namespace ldp {

// Config/input rejection: maps to CLI exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exponential moment blew past the safe exponent range at the requested lambda.
struct CumulantOverflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A coefficient evaluation broke the declared linear-growth envelope
// (only thrown by models wrapped with growth checks on).
struct GrowthViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Pure-jump floor construction requested on a model that is not of the
// required form (diffusion present, jumps not bounded away from zero, ...).
struct NotPoissonType : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ODE solution left the representable range before the horizon.
struct FluidBlowup : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ldp
