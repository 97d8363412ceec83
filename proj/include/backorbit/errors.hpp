#pragma once

#include <stdexcept>
#include <string>

namespace backorbit {

/// Base of all library errors. The CLI maps each family to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Point on/outside the sphere, dimension mismatch, invalid parameter range.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inadmissible catalog parameters or malformed specifications.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An iterative method failed to converge within its budget.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The situation is excluded from the model (parabolic or super-repelling
/// points, dilation within noise of 1).
class OutOfScopeError : public Error {
 public:
  OutOfScopeError(const std::string& what, double log_dilation)
      : Error(what), log_dilation_(log_dilation) {}
  double log_dilation() const { return log_dilation_; }

 private:
  double log_dilation_;
};

/// A property that must hold mathematically was observed to fail.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// No candidate backward chain passed diagnostics.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

}  // namespace backorbit
