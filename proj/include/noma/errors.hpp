#pragma once

#include <stdexcept>
#include <string>

namespace noma {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A closed-form expression was evaluated outside its real domain.
class NumericDomainError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// An iterate left the strict interior of the inequality constraints.
class InteriorViolation : public Error {
 public:
  using Error::Error;
};

class LineSearchFailure : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace noma
