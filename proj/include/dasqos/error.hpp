#pragma once

#include <stdexcept>
#include <string>

namespace dasqos {

/// Input violates a documented precondition (bad parameters, malformed config).
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce a trustworthy result.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Effective load of flows 1..n is not below one.
class StabilityError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Root bracket expansion hit its cap without a sign change.
class NoRootError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Requested higher-priority energy mode does not apply to the flows.
class InvalidModeError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

/// The partial-fraction outage formula cannot be used for this input
/// (activity below one, or poles too close to resolve).
class ClosedFormUnavailable : public NumericalError {
public:
  using NumericalError::NumericalError;
};

}  // namespace dasqos
