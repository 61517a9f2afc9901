#pragma once

#include <stdexcept>
#include <string>

namespace flowforge {

// Error taxonomy. The CLI maps each family to a distinct exit code.

/// Invalid configuration or a violated precondition on caller-supplied values.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed, truncated or inconsistent input data.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical breakdown: divergence, degenerate inputs with no defined result.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace flowforge
