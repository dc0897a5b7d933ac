#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace synsearch {

enum class ErrorCode {
  kMalformedInput,
  kInvalidTree,
  kInvalidBio,
  kVersionMismatch,
  kIo,
  kQuerySyntax,
  kCompile,
  kInvalidArgument,
  kEmptyPositiveSet,
  kUntypedRelation,
  kNotFound,
  kConflict,
};

std::string_view error_code_name(ErrorCode code);

/// Library-wide exception. `sentence_id`, `line` and `position` are filled
/// where they are meaningful (ingestion and query parsing) and left at their
/// defaults otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Error(ErrorCode code, const std::string& message, std::string sentence_id,
        long line)
      : std::runtime_error(message),
        code_(code),
        sentence_id_(std::move(sentence_id)),
        line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& sentence_id() const noexcept { return sentence_id_; }
  long line() const noexcept { return line_; }
  long position() const noexcept { return position_; }

  Error& with_position(long position) {
    position_ = position;
    return *this;
  }

 private:
  ErrorCode code_;
  std::string sentence_id_;
  long line_ = -1;
  long position_ = -1;
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedInput: return "malformed_input";
    case ErrorCode::kInvalidTree: return "invalid_tree";
    case ErrorCode::kInvalidBio: return "invalid_bio";
    case ErrorCode::kVersionMismatch: return "version_mismatch";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kQuerySyntax: return "query_syntax";
    case ErrorCode::kCompile: return "compile_error";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kEmptyPositiveSet: return "empty_positive_set";
    case ErrorCode::kUntypedRelation: return "untyped_relation";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kConflict: return "conflict";
  }
  return "unknown";
}

}  // namespace synsearch
