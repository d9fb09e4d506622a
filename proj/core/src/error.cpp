#include "iterlara/error.hpp"

namespace iterlara {

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::UnknownAttribute: return "UnknownAttribute";
    case ErrorCode::PropertyViolation: return "PropertyViolation";
    case ErrorCode::DefaultViolation: return "DefaultViolation";
    case ErrorCode::NoCommonKeys: return "NoCommonKeys";
    case ErrorCode::NoCommonValues: return "NoCommonValues";
    case ErrorCode::KeyValueClash: return "KeyValueClash";
    case ErrorCode::UnboundName: return "UnboundName";
    case ErrorCode::FuelExhausted: return "FuelExhausted";
    case ErrorCode::NonIntegerCond: return "NonIntegerCond";
    case ErrorCode::NegativeCond: return "NegativeCond";
    case ErrorCode::NotScalarTable: return "NotScalarTable";
    case ErrorCode::NameClash: return "NameClash";
    case ErrorCode::UnknownName: return "UnknownName";
    case ErrorCode::UnboundedIteration: return "UnboundedIteration";
    case ErrorCode::UnknownFunctionCost: return "UnknownFunctionCost";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::SizeTooLarge: return "SizeTooLarge";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::BadStride: return "BadStride";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::UnbalancedBrackets: return "UnbalancedBrackets";
    case ErrorCode::NegativePointer: return "NegativePointer";
    case ErrorCode::NegativeCell: return "NegativeCell";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownFunction: return "UnknownFunction";
    case ErrorCode::UnknownTable: return "UnknownTable";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

Error::Error(ErrorCode code, std::string message)
    : std::runtime_error(message), code_(code), message_(std::move(message)) {
  rebuild();
}

void Error::prepend_path(const std::string& segment) {
  path_ = path_.empty() ? segment : segment + "/" + path_;
  rebuild();
}

void Error::rebuild() {
  what_ = std::string(error_code_name(code_)) + ": " + message_;
  if (!path_.empty()) what_ += " (at " + path_ + ")";
}

PropertyViolation::PropertyViolation(std::string fn_name, std::string property,
                                     std::array<Scalar, 3> counterexample, std::string detail)
    : Error(ErrorCode::PropertyViolation,
            "function '" + fn_name + "' violates " + property + ": " + detail),
      fn_(std::move(fn_name)),
      property_(std::move(property)),
      counterexample_(counterexample) {}

SyntaxError::SyntaxError(std::size_t line, std::size_t column, std::string message)
    : Error(ErrorCode::SyntaxError,
            std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

UnbalancedBrackets::UnbalancedBrackets(std::size_t position)
    : Error(ErrorCode::UnbalancedBrackets, "unbalanced bracket at position " + std::to_string(position)),
      position_(position) {}

void fail(ErrorCode code, std::string message) { throw Error(code, std::move(message)); }

}  // namespace iterlara
