#pragma once

#include <stdexcept>
#include <string>

namespace pwl {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes that do not fit the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Out-of-range scalar argument (clamp bounds, generator factor, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent model or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A call made in a state the callee does not accept.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid data values (labels outside {0,1}, empty classes).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Tabular schema problems: missing columns, feature mismatch.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pwl
