#pragma once

#include <stdexcept>
#include <string>

namespace ebbm {

// Malformed arguments: wrong lengths, out-of-range values, bad tokens.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Request exceeds what exact enumeration can handle.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterative or root-finding routine failed.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// |M| too close to 1 for the inverse hyperbolic tangent.
class DegenerateMagnetization : public std::domain_error {
 public:
  DegenerateMagnetization() : std::domain_error("degenerate magnetization") {}
};

// Both coefficients of the gamma objective vanish.
class DegenerateObjective : public std::domain_error {
 public:
  DegenerateObjective() : std::domain_error("degenerate objective") {}
};

}  // namespace ebbm
