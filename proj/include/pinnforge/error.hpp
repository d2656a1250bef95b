#pragma once

#include <stdexcept>
#include <string>

namespace pinnforge {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (e.g. a bad index).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Caller broke a precondition: mismatched shapes, mixed jet bases, off-boundary points.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Non-finite or singular arithmetic.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed tape (dangling or forward-referencing operands).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or option values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// RK4 produced a non-finite state.
class IntegratorError : public NumericError {
 public:
  IntegratorError(const std::string& what, std::size_t step)
      : NumericError(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace pinnforge
