#pragma once

#include <stdexcept>
#include <string>

namespace qctx {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input matrix is not square where a square one is required.
class NonSquare : public Error {
 public:
  using Error::Error;
};

/// Operand dimensions are incompatible.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// Dimension exceeds the supported bound (n <= 256) or is not positive.
class InvalidDimension : public Error {
 public:
  using Error::Error;
};

/// Matrix fails the self-adjointness test required by the operation.
class NotSelfAdjoint : public Error {
 public:
  using Error::Error;
};

/// Input vector is not normalized.
class NotUnitVector : public Error {
 public:
  using Error::Error;
};

/// Branch sums of a channel deviate from the identity.
class UnitalityViolation : public Error {
 public:
  using Error::Error;
};

/// A channel branch is (numerically) the zero matrix.
class ZeroBranch : public Error {
 public:
  using Error::Error;
};

/// A branch of a would-be sharp channel is not a projection.
class NotSharp : public Error {
 public:
  NotSharp(const std::string& msg, int index) : Error(msg), branch_index(index) {}
  int branch_index;
};

/// A projection of a would-be context is not rank one.
class NotRankOne : public Error {
 public:
  NotRankOne(const std::string& msg, int index) : Error(msg), branch_index(index) {}
  int branch_index;
};

/// Two independently computed routes to the same verdict disagree.
/// Signals a tolerance pathology or an implementation bug, never a normal
/// negative result.
class VerdictMismatch : public Error {
 public:
  using Error::Error;
};

/// Refinement order holds but the guaranteed projector partition was not found.
class DecompositionFailure : public Error {
 public:
  using Error::Error;
};

/// POVM effects fail validation (not effects, or do not sum to the identity).
class InvalidPovm : public Error {
 public:
  using Error::Error;
};

/// Outcome label not present in a POVM.
class UnknownOutcome : public Error {
 public:
  using Error::Error;
};

/// Outcome label sets of joint and marginal POVMs do not match.
class LabelMismatch : public Error {
 public:
  using Error::Error;
};

/// Supplied block basis does not span the range of its projection.
class InvalidBlockBasis : public Error {
 public:
  using Error::Error;
};

/// Input file or JSON document cannot be parsed into the requested object.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace qctx
