#pragma once

#include <stdexcept>
#include <string>

namespace sawqed {

// Raised when an input record or file breaks one of its invariants.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a computation leaves its domain of validity or fails to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (not valid JSON, wrong value types).
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sawqed
