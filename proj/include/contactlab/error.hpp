#pragma once

#include <stdexcept>
#include <string>

namespace contactlab {

/// Raised for invalid inputs and numerical failures inside the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised while reading or validating an experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace contactlab
