#pragma once

#include <stdexcept>
#include <string>

namespace gcs {

// Invalid argument or violated precondition.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Tensor or array extents do not line up.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed (factorization, solver, bound violation).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Persistent artifact could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gcs
