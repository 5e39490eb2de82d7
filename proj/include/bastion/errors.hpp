#pragma once

#include <stdexcept>
#include <string>

namespace bastion {

/// Base for every error this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mismatched vector/matrix dimensions between caller data and model maps.
struct DimensionError : Error {
  using Error::Error;
};

/// A state was handed to barrier math with h(x) <= 0.
struct UnsafeStateError : Error {
  double h;
  explicit UnsafeStateError(double h_val, const std::string& what)
      : Error(what), h(h_val) {}
};

/// Barrier-function argument left the domain (beta or z + beta0 <= 0).
struct BarrierDomainError : Error {
  using Error::Error;
};

/// An operation needed history/stack data that is not there yet.
struct InsufficientDataError : Error {
  using Error::Error;
};

/// Non-finite values appeared during integration.
struct IntegrationBlowupError : Error {
  double t;
  int stage;  // RK4 stage 1..4, or 0 when detected at a step boundary
  IntegrationBlowupError(double t_val, int stage_val, const std::string& what)
      : Error(what), t(t_val), stage(stage_val) {}
};

/// Bad user-supplied configuration; `field` is the JSON path that failed and
/// is prefixed onto the message so every catch site reports it.
struct ConfigError : Error {
  std::string field;
  ConfigError(std::string field_path, const std::string& what)
      : Error(field_path.empty() ? what : field_path + ": " + what),
        field(std::move(field_path)) {}
};

/// A gain combination that makes the algorithm degenerate (e.g. R singular).
struct DegenerateGainError : Error {
  using Error::Error;
};

/// The closed-loop trajectory left the safe set during a run.
struct SafetyViolationError : Error {
  double t;
  double h;
  SafetyViolationError(double t_val, double h_val, const std::string& what)
      : Error(what), t(t_val), h(h_val) {}
};

}  // namespace bastion
