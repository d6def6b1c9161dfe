#pragma once

#include <stdexcept>
#include <string>

namespace ricnn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments, shape mismatches, invalid configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or unwritable paths and malformed file contents.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values in a loss, gradient or oracle evaluation.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace ricnn
