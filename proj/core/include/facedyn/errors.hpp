#pragma once

#include <stdexcept>
#include <string>

namespace facedyn {

/// Base class for failures caused by the data itself (bad files, broken
/// pairing, contract violations on input matrices). CLI maps these to exit 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A required column or field is missing or mistyped.
class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

/// A cell failed to parse; message carries the row index.
class ParseError : public DataError {
 public:
  using DataError::DataError;
};

/// Real/fake pairing is broken (a pair_id appears an odd number of times).
class PairingError : public DataError {
 public:
  using DataError::DataError;
};

/// Bad configuration (unknown option, unreadable path). CLI maps to exit 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace facedyn
