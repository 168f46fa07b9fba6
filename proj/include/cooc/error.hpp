#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cooc {

enum class ErrorCode {
  kInvalidArgument,
  kUnknownClass,
  kEmptyDb,
  kEmptyRestriction,
  kParse,
  kFormat,
  kReferentialIntegrity,
  kIo,
  kSizeGuard,
  kInternalConsistency,
  kNoEvaluableClasses,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kUnknownClass: return "unknown-class";
    case ErrorCode::kEmptyDb: return "empty-db";
    case ErrorCode::kEmptyRestriction: return "empty-restriction";
    case ErrorCode::kParse: return "parse-error";
    case ErrorCode::kFormat: return "format-error";
    case ErrorCode::kReferentialIntegrity: return "referential-integrity";
    case ErrorCode::kIo: return "io-error";
    case ErrorCode::kSizeGuard: return "size-guard";
    case ErrorCode::kInternalConsistency: return "internal-consistency";
    case ErrorCode::kNoEvaluableClasses: return "no-evaluable-classes";
  }
  return "unknown";
}

// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cooc
