#pragma once

#include <stdexcept>
#include <string>

namespace hatk {

/// Input rejected by a precondition check (bad shape, bad pattern parameters,
/// mismatched tensors). The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A dense representation would exceed the configured size cap.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A query row with no allowed key reached an attention engine.
class DegenerateRowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Calibration samples do not determine the cost parameters.
class UnfittableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hatk
