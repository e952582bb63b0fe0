#pragma once

#include <stdexcept>
#include <string>

namespace pinaudio {

// Bad arguments or violated preconditions (maps to CLI exit code 1).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent data: unreadable files, degenerate samples,
// segmentation failures (maps to CLI exit code 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pinaudio
