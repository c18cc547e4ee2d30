#pragma once

#include <stdexcept>
#include <string>

namespace droplet {

/// Violated precondition on an argument (bad particle count, invalid window, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Request exceeds a resource guard (memory cap, sector dimension cap, window too small).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical kernel failed (non-convergence, loss of positive definiteness).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A checked mathematical claim did not hold at its tolerance.
class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace droplet
