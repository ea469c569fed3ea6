#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed expression or model text. `offset` is a byte offset into the
// parsed string; line/column are filled in by the model loader.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t offset, std::size_t line = 0,
             std::size_t column = 0)
      : Error(msg), offset(offset), line(line), column(column) {}
  std::size_t offset;
  std::size_t line;
  std::size_t column;
};

class SemanticError : public Error {
 public:
  using Error::Error;
};

// ln/sqrt of a negative number, 0 to a negative power, non-finite results.
class DomainError : public Error {
 public:
  using Error::Error;
};

class NonSeparable : public Error {
 public:
  NonSeparable(const std::string& msg, std::string term)
      : Error(msg), term(std::move(term)) {}
  std::string term;
};

class NotRational : public Error {
 public:
  using Error::Error;
};

class ControlRateUnsolvable : public Error {
 public:
  using Error::Error;
};

class ConservationFailed : public Error {
 public:
  ConservationFailed(const std::string& msg, std::string residual)
      : Error(msg), residual(std::move(residual)) {}
  std::string residual;
};

class NotAffineInTarget : public Error {
 public:
  using Error::Error;
};

class NonFinite : public Error {
 public:
  NonFinite(const std::string& msg, std::size_t step) : Error(msg), step(step) {}
  std::size_t step;
};

class BranchLimitExceeded : public Error {
 public:
  using Error::Error;
};

class UnsolvableRateCondition : public Error {
 public:
  using Error::Error;
};

}  // namespace phm
