#pragma once

#include <stdexcept>
#include <string>

namespace cfas {

// Argument outside an operation's domain (negative z, bad order, bad geometry...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Series, quadrature or root finder failed to meet its stopping rule.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Simulation grid exceeds the configured point cap.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cfas
