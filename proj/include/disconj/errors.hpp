#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace disconj {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `position()` is a byte offset into the source.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}
  [[nodiscard]] std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Evaluation outside the domain of a function (1/0, ln of nonpositive, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Requested operation needs a derivative of abs/min/max.
class NonDifferentiableError : public Error {
 public:
  using Error::Error;
};

/// Step-size underflow, step-count exhaustion or overflow in the integrator.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold for its input.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace disconj
