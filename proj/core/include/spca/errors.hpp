#pragma once

#include <stdexcept>
#include <string>

namespace spca {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (shape, symmetry, ranges).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical routine failed to converge.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Perturbation requested on a spectrum with no gap between distinct eigenvalues.
class DegenerateSpectrumError : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration would exceed its combinatorial guard.
class GuardError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace spca
