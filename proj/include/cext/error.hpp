#pragma once

#include <stdexcept>
#include <string>

namespace cext {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible tensor or array shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value (zero paths, mask ratio of one, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A value lies outside the domain a routine can represent, e.g. a path
/// delay past the last PDP bin.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Caller broke a documented precondition (backward on a non-scalar, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

class EmptyProfileError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Loss became NaN or Inf during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace cext
