#pragma once

#include <stdexcept>
#include <string>

namespace cbrc {

/// A matrix that must be positive definite is not, numerically.
class SingularError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative kernel failed to converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the domain of an operation (bad dimensions, non-PD H_j, rho outside (0,1), ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A design violates constraints it is required to satisfy, or no feasible design exists.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An enumeration would exceed its configured candidate budget.
class TooLargeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cbrc
