#pragma once

#include <stdexcept>
#include <string>

namespace mcn {

/// Rejected input: malformed document, broken graph/plant invariant, bad
/// operation precondition. Maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical certificate failed: a fixed point did not verify, the two gamma
/// methods disagree, a deadbeat gain is not nilpotent, or structural and
/// subspace verdicts are inconsistent. Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exhaustive enumeration would exceed the configured budget. Maps to CLI
/// exit code 3.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mcn
