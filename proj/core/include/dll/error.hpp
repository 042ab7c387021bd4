#pragma once

#include <stdexcept>
#include <string>

namespace dll {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor/layer shape mismatches.
struct DimensionError : Error {
  using Error::Error;
};

// Violated call preconditions (non-scalar loss, invalid distribution, ...).
struct ContractError : Error {
  using Error::Error;
};

// Non-finite values where finite ones are required.
struct NumericError : Error {
  using Error::Error;
};

// Invalid experiment/model/training configuration.
struct ConfigError : Error {
  using Error::Error;
};

// Malformed input files (CSV, config documents).
struct ParseError : Error {
  using Error::Error;
};

}  // namespace dll
