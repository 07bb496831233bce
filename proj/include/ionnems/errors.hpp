#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace ionnems {

/// Precondition or domain violation in caller-supplied data.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed (eigen-solver, integrator, quadrature).
/// `time()` carries the offending simulation time when one is known.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what,
                          double time = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(what), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// The drift matrix has no stable damped subspace.
class NoSteadyState : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A series is too short (or too quiet) for the requested extraction.
class NotEnoughData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ionnems
