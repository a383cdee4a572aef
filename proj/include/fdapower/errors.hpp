#pragma once

#include <stdexcept>
#include <string>

namespace fdapower {

// Invalid user-supplied configuration (bad keys, out-of-range values, malformed files).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Numerical failure (non-convergence, singular systems, invalid domains).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Matrix expected to be symmetric positive definite is not.
class NotSpdError : public NumericError {
 public:
  explicit NotSpdError(const std::string& msg) : NumericError(msg) {}
};

}  // namespace fdapower
