#pragma once

#include <stdexcept>
#include <string>

namespace odefit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or dimension mismatch between arguments.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A right-hand side, Jacobian or observation produced a non-finite value, or
/// was asked to evaluate at a singular configuration.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Non-finite gradients handed to an update rule, or a non-finite loss.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  enum class Kind {
    divergence,      ///< step budget exhausted before reaching the final sample
    instability,     ///< state became non-finite
    step_underflow,  ///< step size collapsed below representable resolution
  };

  SolverError(Kind kind, double time, bool in_sensitivity, const std::string& what)
      : Error(what), kind_(kind), time_(time), in_sensitivity_(in_sensitivity) {}

  Kind kind() const noexcept { return kind_; }
  /// Integration time reached when the failure occurred.
  double time() const noexcept { return time_; }
  /// True when the failing system was the sensitivity-augmented one.
  bool in_sensitivity() const noexcept { return in_sensitivity_; }

 private:
  Kind kind_;
  double time_;
  bool in_sensitivity_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A metric is undefined for its inputs (for example RSSE against a zero target).
class MetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace odefit
