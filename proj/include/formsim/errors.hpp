#pragma once

#include <stdexcept>
#include <string>

namespace formsim {

/// Base class for all errors raised by the simulator.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pitch entered the guard band around +-pi/2 where the Euler-rate
/// kinematics are singular.
struct GimbalLockError : Error {
  using Error::Error;
};

/// A state component became NaN or infinite during integration.
struct NonFiniteStateError : Error {
  using Error::Error;
};

/// The requested wrench maps to a negative squared rotor speed.
struct InfeasibleAllocationError : Error {
  using Error::Error;
};

/// A follower was asked for a setpoint with an empty neighbor set.
struct IsolatedFollowerError : Error {
  using Error::Error;
};

/// A leader was asked for a setpoint without the reference trajectory.
struct MissingReferenceError : Error {
  using Error::Error;
};

/// Metrics were requested on a log with no rows.
struct EmptyLogError : Error {
  using Error::Error;
};

/// Malformed input file (JSON syntax, CSV row shape).
struct ParseError : Error {
  using Error::Error;
};

/// Well-formed input that violates a documented invariant.
struct ValidationError : Error {
  using Error::Error;
};

/// A simulation run stopped before its configured duration.
struct SimulationAbortError : Error {
  using Error::Error;
};

/// Filesystem failure, annotated with the offending path.
struct IoError : Error {
  using Error::Error;
};

}  // namespace formsim
