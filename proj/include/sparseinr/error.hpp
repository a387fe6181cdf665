#pragma once

#include <stdexcept>
#include <string>

namespace sparseinr {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument, configuration value, or shape.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// File contents do not conform to an INRV/INRC/CSV schema.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value during training or evaluation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace sparseinr
