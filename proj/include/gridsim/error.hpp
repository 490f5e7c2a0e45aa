#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gridsim {

/// Broad failure classes. The CLI maps each one to a distinct exit code.
enum class ErrorCategory {
  Usage = 2,
  Parse = 3,
  Validation = 4,
  Numerical = 5,
  Io = 6,
  Verification = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Malformed input text. `position` is a byte offset when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position = 0)
      : Error(ErrorCategory::Parse, what), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorCategory::Validation, what) {}
};

/// Power flow did not converge, or a search ran out of bracket.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, int step = -1)
      : Error(ErrorCategory::Numerical, what), step_(step) {}

  /// Time-step index the failure belongs to, -1 when not step-bound.
  int step() const noexcept { return step_; }

 private:
  int step_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::Io, what) {}
};

/// A produced artifact failed its own consistency check.
class VerificationError : public Error {
 public:
  explicit VerificationError(const std::string& what) : Error(ErrorCategory::Verification, what) {}
};

}  // namespace gridsim
