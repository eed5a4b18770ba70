#pragma once

#include <stdexcept>
#include <string>

namespace pvs {

/// Config / input validation problems. The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical aborts (divergence guards, step restrictions, failed inversions).
/// The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

class FlowDivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StepRestrictionError : public NumericalError {
 public:
  StepRestrictionError(const std::string& msg, double required)
      : NumericalError(msg), required_dt(required) {}
  double required_dt;
};

class InverseMapError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class HorizonError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace pvs
