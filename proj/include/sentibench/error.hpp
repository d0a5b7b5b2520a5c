#pragma once

#include <stdexcept>

namespace sentibench {

// Base class for all toolkit failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problems the user can fix: missing files, malformed rows, bad labels,
// degenerate datasets. The CLI maps these to exit code 2; everything else
// exits with 1.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace sentibench
