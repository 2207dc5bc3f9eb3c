#pragma once

#include <stdexcept>
#include <string>

namespace shrink {

// Bad arguments or parameters outside a documented domain.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine failed to reach its accuracy target, or an
// intermediate quantity degenerated (vanishing denominator, failed bracket).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File access and parsing failures.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shrink
