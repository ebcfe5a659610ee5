#pragma once

#include <stdexcept>
#include <string>

namespace kws {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid argument value (bad stride, keep_prob out of range, ...).
struct ParamError : Error {
  using Error::Error;
};

// Tensor/layer dimension disagreement.
struct ShapeError : Error {
  using Error::Error;
};

// Structurally malformed file (bad magic, truncated payload, ...).
struct FormatError : Error {
  using Error::Error;
};

// Well-formed file in a format we deliberately do not handle.
struct UnsupportedFormatError : FormatError {
  using FormatError::FormatError;
};

// Filesystem-level failure (cannot open/read/write).
struct IoError : Error {
  using Error::Error;
};

// Inconsistent run configuration detected before any work starts.
struct ConfigError : Error {
  using Error::Error;
};

// Dataset root with nothing usable in it.
struct EmptyDatasetError : Error {
  using Error::Error;
};

}  // namespace kws
