#pragma once

#include <stdexcept>
#include <string>

namespace apsearch {

// Bad caller-supplied value (out-of-range id, empty set, too few points).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Request exceeds a fixed size cap (generation, dense matrix dimension).
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Malformed or invariant-violating graph document.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Internal precondition broken (dimension mismatch, non-unitary input).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace apsearch
