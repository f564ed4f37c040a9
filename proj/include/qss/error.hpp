#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qss {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain where an operation is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Root finder was handed an interval without a sign change.
class BracketError : public Error {
 public:
  BracketError(const std::string& what, double lo, double hi, double f_lo, double f_hi)
      : Error(what), lo(lo), hi(hi), f_lo(f_lo), f_hi(f_hi) {}
  double lo, hi, f_lo, f_hi;
};

/// Adaptive quadrature ran out of refinement budget.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double estimate, double achieved)
      : Error(what), estimate(estimate), achieved(achieved) {}
  double estimate;  ///< best value reached
  double achieved;  ///< absolute error estimate at that point
};

/// Samples that were required to be strictly monotone are not.
class NotMonotoneError : public Error {
 public:
  NotMonotoneError(const std::string& what, std::size_t index) : Error(what), index(index) {}
  std::size_t index;  ///< first sample that breaks the direction set by samples 0 and 1
};

class InvalidParameters : public Error {
 public:
  using Error::Error;
};

/// A spectrum (or something derived from it) violates a hard physical requirement.
class InvalidSpectrum : public Error {
 public:
  explicit InvalidSpectrum(const std::string& what, long row = -1)
      : Error(row >= 0 ? what + " (row " + std::to_string(row) + ")" : what), row(row) {}
  long row;  ///< 1-based data row where the violation was found, -1 if not row related
};

/// Requested quantization level does not exist below the barrier top.
class LevelNotFound : public Error {
 public:
  LevelNotFound(const std::string& what, double action_at_emax)
      : Error(what), action_at_emax(action_at_emax) {}
  double action_at_emax;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long row, long column)
      : Error(what + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")"),
        row(row),
        column(column) {}
  long row, column;
};

}  // namespace qss
