#pragma once

#include <stdexcept>
#include <string>

namespace kmsf {

/// Base of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Division by an expression that normalizes to zero.
class DivisionByZero : public Error {
 public:
  DivisionByZero() : Error("division by the zero expression") {}
};

/// A point lies outside the validity domain (vanishing denominator, negative
/// radicand, missing coordinate).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A square root evaluates to an irrational number at the requested point.
class IrrationalAtPoint : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The curvature tensor is not a combination of the six block tensors.
class NoFit : public Error {
 public:
  using Error::Error;
};

/// Two independent derivations of the same quantity disagree.
class InternalInconsistency : public Error {
 public:
  using Error::Error;
};

}  // namespace kmsf
