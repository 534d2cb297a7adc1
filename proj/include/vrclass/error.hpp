#pragma once

#include <stdexcept>
#include <string>

namespace vrclass {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Input file could not be read or does not match its schema.
class IngestError : public Error {
  public:
    using Error::Error;
};

/// A column has zero variance where a spread is required.
class DegenerateColumnError : public Error {
  public:
    using Error::Error;
};

/// Preprocessing plan cannot be fitted or applied.
class PlanError : public Error {
  public:
    using Error::Error;
};

/// Caller violated a documented precondition (k > n, length mismatch, ...).
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// Numerical input is unusable (non-finite values, coincident centers, ...).
class NumericError : public Error {
  public:
    using Error::Error;
};

/// Pipeline configuration is incomplete or inconsistent.
class ConfigError : public Error {
  public:
    using Error::Error;
};

}  // namespace vrclass
