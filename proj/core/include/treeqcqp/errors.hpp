#pragma once

#include <stdexcept>
#include <string>

namespace treeqcqp {

/// Malformed input: wrong dimensions, non-Hermitian data, bad bounds.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an algorithm does not hold.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace treeqcqp
