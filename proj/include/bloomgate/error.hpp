#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bloomgate {

enum class ErrorCode {
  UnsupportedFormat,
  EmptyDocument,
  MalformedInput,
  EmptyQuestion,
  EmptyCorpus,
  DimensionMismatch,
  ZeroVector,
  ProviderUnavailable,
  NoScoreFound,
  JudgeUnparseable,
  NoSignals,
  OutOfRange,
  EmptyList,
  EmptyAnalysis,
  DuplicateId,
  StorageFailure,
  NotFound,
  InvalidLexicon,
  InvalidConfig,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::EmptyDocument: return "EmptyDocument";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::EmptyQuestion: return "EmptyQuestion";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::NoScoreFound: return "NoScoreFound";
    case ErrorCode::JudgeUnparseable: return "JudgeUnparseable";
    case ErrorCode::NoSignals: return "NoSignals";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::EmptyAnalysis: return "EmptyAnalysis";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::StorageFailure: return "StorageFailure";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::InvalidLexicon: return "InvalidLexicon";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one ErrorCode so callers
/// (the CLI exit codes, the HTTP error mapping) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bloomgate
