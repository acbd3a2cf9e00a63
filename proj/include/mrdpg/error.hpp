#pragma once

#include <stdexcept>
#include <string>

namespace mrdpg {

// Bad arguments, dimension mismatches and schema violations.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Model validity failures (a probability outside [0,1]).
class ModelError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Linear algebra that failed to converge.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mrdpg
