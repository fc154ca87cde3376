#pragma once

#include <stdexcept>
#include <string>

namespace rflab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Model or operation parameters outside their admissible range.
struct ParameterError : Error {
  using Error::Error;
};

/// Two operands live on different grids.
struct GridMismatch : Error {
  using Error::Error;
};

/// A time integrator gave up (blow-up, positivity loss, non-finite state).
struct SolverAbort : Error {
  using Error::Error;
};

/// Malformed or inconsistent experiment configuration.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace rflab
