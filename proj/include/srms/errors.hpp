#pragma once

#include <stdexcept>
#include <string>

namespace srms {

/// Parameter outside the domain of an operation (maps to CLI exit code 3).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A series that only converges in the sub-critical regime was requested elsewhere.
class NonConvergenceError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Too few conditioning events for an estimator to be meaningful.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A heavy-tailed term left the range of double.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Manifest on disk does not match the supported schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace srms
