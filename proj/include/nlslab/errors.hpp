#pragma once

#include <stdexcept>
#include <string>

namespace nlslab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad dimension, negative cutoff, out-of-range parameter.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Operands live on different lattices.
class LatticeMismatch : public Error {
 public:
  using Error::Error;
};

// Grid too coarse for the requested transform or quadrature.
class UnderResolved : public Error {
 public:
  using Error::Error;
};

// A norm or rate left the representable range; carries the offending norm.
class Overflow : public Error {
 public:
  Overflow(const std::string& what, double norm)
      : Error(what + " (norm " + std::to_string(norm) + ")"), norm_(norm) {}
  double norm() const { return norm_; }

 private:
  double norm_;
};

// Implicit nonlinear stage failed to converge even after step splitting.
class NoConvergence : public Error {
 public:
  using Error::Error;
};

// A requested run exceeds the configured step budget.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, long long required_steps)
      : Error(what + " (requires " + std::to_string(required_steps) + " steps)"),
        required_steps_(required_steps) {}
  long long required_steps() const { return required_steps_; }

 private:
  long long required_steps_;
};

// Too few samples or degenerate data for a statistical estimate.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

}  // namespace nlslab
