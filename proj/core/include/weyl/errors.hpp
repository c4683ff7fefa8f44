#pragma once

#include <stdexcept>
#include <string>

namespace weyl {

// Invalid user input: bad model parameters, malformed configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Factorization breakdown, eigensolver failure, refinement exhausted.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace weyl
