#ifndef DIRACGAP_ERRORS_HPP
#define DIRACGAP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace diracgap {

// Bad parameters or preconditions (CLI exit code 2).
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed to converge or produced garbage (exit code 3).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two evaluations of the same quantity disagree.
struct ConsistencyError : NumericalError {
  using NumericalError::NumericalError;
};

// The potential violates the real-alpha2 hypothesis (exit code 4).
struct AssumptionViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace diracgap

#endif
