#pragma once

#include <stdexcept>
#include <string>

namespace gbmc {

// Invalid input: bad parameters, malformed configuration, violated preconditions.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation that cannot deliver a trustworthy number (series truncation,
// excessive resampling).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gbmc
