// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace denslift {

/// Base of every error raised by the engine. Domain errors map to CLI exit
/// code 1, syntax errors to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DENSLIFT_ERROR(Name)                \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

DENSLIFT_ERROR(ZeroDenominator);
DENSLIFT_ERROR(DuplicateSymbol);
DENSLIFT_ERROR(DimensionMismatch);
DENSLIFT_ERROR(ZeroOperator);
DENSLIFT_ERROR(HasWeightOperator);
DENSLIFT_ERROR(ExceptionalWeight);
DENSLIFT_ERROR(OrderTooHigh);
DENSLIFT_ERROR(OrderViolation);
DENSLIFT_ERROR(NotNormalized);
DENSLIFT_ERROR(DimensionTooSmall);
DENSLIFT_ERROR(DimensionNotOne);
DENSLIFT_ERROR(BadPolynomial);
DENSLIFT_ERROR(IndexOutOfRange);
DENSLIFT_ERROR(NotExact);

#undef DENSLIFT_ERROR

/// Raised by the expression parser; carries the byte offset of the failure.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace denslift
