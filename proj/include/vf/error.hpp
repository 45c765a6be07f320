#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vf {

/// Argument outside the mathematical domain of a function (e.g. a
/// non-positive beta argument or a frequency on the boundary of (0,1)).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Violated precondition on otherwise well-typed input.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Not enough samples to carry out a split or fold construction.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range input file content. `line()` is 1-based, 0 when
/// the error is not tied to a line.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A quadrature node produced a non-finite integrand value.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quadrature failed to reach tolerance. Carries the best estimate so the
/// caller can decide whether it is usable.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double estimate, double error, long index = -1)
      : std::runtime_error(what), estimate_(estimate), error_(error), index_(index) {}
  double estimate() const noexcept { return estimate_; }
  double error() const noexcept { return error_; }
  /// Index of the failing term inside a sum, -1 if not applicable.
  long index() const noexcept { return index_; }

 private:
  double estimate_;
  double error_;
  long index_;
};

}  // namespace vf
