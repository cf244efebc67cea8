#pragma once

#include <stdexcept>
#include <string>

namespace bellint {

/// Argument outside the mathematical domain of an operation
/// (visibility/efficiency outside [0,1], n = 0, non-PSD state, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The N -> infinity orthant formula only covers unbiased marginals.
class UnsupportedRegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No Bell violation at perfect detection, so there is no efficiency threshold.
class NoThresholdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A required setting pair had no postselected runs.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input too large for an exponential-time routine.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace bellint
