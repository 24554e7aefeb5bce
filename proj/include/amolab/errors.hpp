#pragma once

#include <stdexcept>
#include <string>

namespace amolab {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A big-integer result would exceed the configured decimal-digit budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// The energy is (numerically) an eigenvalue of the interval restriction.
class ResonantInterval : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed to meet its stopping rule.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// An eigenvector does not decay inside the box.
class NotLocalized : public Error {
 public:
  using Error::Error;
};

}  // namespace amolab
