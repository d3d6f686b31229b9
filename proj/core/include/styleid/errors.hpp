#pragma once

#include <stdexcept>
#include <string>

namespace styleid {

// Bad shapes, out-of-range hyperparameters, malformed inputs.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite losses, non-converging decompositions.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable / unwritable files and corrupt containers.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace styleid
