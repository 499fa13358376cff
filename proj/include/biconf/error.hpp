#pragma once

#include <stdexcept>
#include <string>

namespace biconf {

/// Base class for all recoverable errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. Line and column are 1-based positions inside
/// the expression source.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error("syntax error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column),
        detail_(what) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  int line_;
  int column_;
  std::string detail_;
};

/// Invalid or inconsistent manifest / user input.
class ManifestError : public Error {
 public:
  using Error::Error;
};

/// Math-domain failure at a sample point (log of a nonpositive number,
/// division by zero, degenerate metric, degenerate frame, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A requested quantity is undefined for the projector ranks at hand.
class RankError : public Error {
 public:
  using Error::Error;
};

/// Projector components violate the orthogonal-projector identities.
class ProjectorError : public Error {
 public:
  using Error::Error;
};

/// Sampling could not produce enough admissible points.
class SamplingError : public Error {
 public:
  using Error::Error;
};

/// Jet order too low for the requested derivative. This is a programming
/// error in the caller, not a property of the input.
class OrderError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace biconf
