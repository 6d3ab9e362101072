#pragma once

#include <stdexcept>
#include <string>

namespace mwl {

/// Caller violated a precondition (bad argument, field mismatch, bad index).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Index outside the valid range of a word, table or sequence.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Mathematically undefined request, e.g. N(g) of a singular matrix.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Exact arithmetic failure such as inverting zero.
class ArithmeticError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Iterative routine did not converge.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace mwl
