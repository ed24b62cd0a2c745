#pragma once

#include <stdexcept>
#include <string>

namespace cssfn {

/// Raised for invalid shapes, hyperparameters or layer wiring.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when an object is used out of order (e.g. backward before forward).
class StateError : public std::logic_error {
 public:
  explicit StateError(const std::string& what) : std::logic_error(what) {}
};

/// Raised by volume, manifest and checkpoint readers/writers.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by the trainer when the loss stops being finite.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cssfn
