#pragma once

#include <stdexcept>
#include <string>

namespace iontrap {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid geometry or mesh parameters (degenerate primitives, overlapping panels).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Scenario file problems. Carries the offending line (0 when not line-specific).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Numerical failure in a field solver, integrator or spectral extraction.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Mathieu parameters outside the first stability region.
class UnstableParametersError : public SolverError {
 public:
  using SolverError::SolverError;
};

} // namespace iontrap
