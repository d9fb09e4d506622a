#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "iterlara/scalar.hpp"

namespace iterlara {

enum class ErrorCode {
  DuplicateKey,
  SchemaMismatch,
  UnknownAttribute,
  PropertyViolation,
  DefaultViolation,
  NoCommonKeys,
  NoCommonValues,
  KeyValueClash,
  UnboundName,
  FuelExhausted,
  NonIntegerCond,
  NegativeCond,
  NotScalarTable,
  NameClash,
  UnknownName,
  UnboundedIteration,
  UnknownFunctionCost,
  SizeMismatch,
  SizeTooLarge,
  Singular,
  NotSquare,
  BadStride,
  EmptyInput,
  UnbalancedBrackets,
  NegativePointer,
  NegativeCell,
  SyntaxError,
  UnknownFunction,
  UnknownTable,
  IoError,
  InvalidArgument,
};

const char* error_code_name(ErrorCode c);

// Every failure raised by the engine. what() is "<Code>: <message>" followed
// by the IR path when the error surfaced during evaluation.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, std::string message);

  ErrorCode code() const { return code_; }
  const std::string& message() const { return message_; }
  const std::string& ir_path() const { return path_; }

  // Called by the evaluator while unwinding, innermost segment first.
  void prepend_path(const std::string& segment);

  const char* what() const noexcept override { return what_.c_str(); }

private:
  void rebuild();

  ErrorCode code_;
  std::string message_;
  std::string path_;
  std::string what_;
};

class PropertyViolation : public Error {
public:
  PropertyViolation(std::string fn_name, std::string property, std::array<Scalar, 3> counterexample,
                    std::string detail);

  const std::string& function() const { return fn_; }
  // "commutativity", "associativity" or "identity".
  const std::string& property() const { return property_; }
  const std::array<Scalar, 3>& counterexample() const { return counterexample_; }

private:
  std::string fn_;
  std::string property_;
  std::array<Scalar, 3> counterexample_;
};

class SyntaxError : public Error {
public:
  SyntaxError(std::size_t line, std::size_t column, std::string message);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

class UnbalancedBrackets : public Error {
public:
  explicit UnbalancedBrackets(std::size_t position);
  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

[[noreturn]] void fail(ErrorCode code, std::string message);

}  // namespace iterlara
