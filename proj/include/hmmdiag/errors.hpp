#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hmmdiag {

/// Shape disagreement between declared dimensions and the data supplied.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed model or observation text. Carries the line and field when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::string field)
      : std::runtime_error(what), line_(line), field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The eigenvalue iteration exhausted its budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A diagonalization-based power left an imaginary residue that is too large
/// to discard.
class NumericQualityError : public std::runtime_error {
 public:
  NumericQualityError(const std::string& what, double residue)
      : std::runtime_error(what), residue_(residue) {}
  double residue() const noexcept { return residue_; }

 private:
  double residue_;
};

/// Direct enumeration would exceed the configured sequence-step cap.
class CapExceededError : public std::runtime_error {
 public:
  CapExceededError(const std::string& what, double required)
      : std::runtime_error(what), required_(required) {}
  /// Sequence-steps (N^T * T) the request needs; may exceed 2^64.
  double required() const noexcept { return required_; }

 private:
  double required_;
};

class CountOverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

}  // namespace hmmdiag
