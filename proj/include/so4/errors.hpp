#pragma once

#include <stdexcept>
#include <string>

namespace so4 {

/// Argument outside the mathematical domain of an operation (l > n-1, eps >= 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Table lookup beyond its precomputed extent.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Caller broke a precondition on a state (wrong shell, unnormalized input).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Orientation of an orbit or density is not defined (circular state, isotropic grid).
class UndefinedOrientation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace so4
