#pragma once

#include <stdexcept>
#include <string>

namespace hsps {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or malformed configuration (CLI exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

/// Bad or inconsistent input data such as tag streams (CLI exit code 3).
struct DataError : Error {
  using Error::Error;
};

/// Fit failures, including non-identifiable problems (CLI exit code 4).
struct FitError : Error {
  using Error::Error;
};

}  // namespace hsps
