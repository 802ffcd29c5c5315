#pragma once

#include <stdexcept>
#include <string>

namespace specpack {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad radius, invalid point, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A hypothesis of the packing construction does not hold for the given space and radius.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a space invariant (asymmetric metric, negative mass, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A construction finished but one of its postconditions failed.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// Iterative eigensolver did not reach the requested tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Internal invariant broken; indicates a bug upstream.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace specpack
