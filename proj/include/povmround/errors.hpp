#pragma once

#include <stdexcept>
#include <string>

namespace povmround {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or block structure of the inputs do not match.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// An object violates the invariants of its type (POVM, PVM, state, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An operation-specific hypothesis does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An iterative method did not converge.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Block-structure identification failed to stabilize.
class NumericalDegeneracyError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; the message carries the location.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace povmround
