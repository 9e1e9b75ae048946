#pragma once

#include <stdexcept>
#include <string>

namespace geofc {

/// Base for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input shape or values (dimension mismatch, non-finite state, unknown id).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Parameter combination the model cannot handle (e.g. gamma = epsilon = 0).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Scenario file failed to parse or validate. Carries the exit-code class.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Root finding or integration did not produce a usable result.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace geofc
