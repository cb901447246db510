#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ragbench {

enum class ErrorCode {
  kInvalidConfig,
  kTemplateError,
  kMalformedLine,
  kEmptyCorpus,
  kPathNotFound,
  kEmptyText,
  kDimMismatch,
  kDuplicateRef,
  kEmptyIndex,
  kTimeout,
  kNetworkError,
  kRateLimitedExhausted,
  kProtocolError,
  kEmptyCompletion,
  kMetricUndefined,
  kEmptyResults,
  kIoError,
  kFormatError,
  kChecksumError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kTemplateError: return "TemplateError";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kPathNotFound: return "PathNotFound";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kDuplicateRef: return "DuplicateRef";
    case ErrorCode::kEmptyIndex: return "EmptyIndex";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kNetworkError: return "NetworkError";
    case ErrorCode::kRateLimitedExhausted: return "RateLimitedExhausted";
    case ErrorCode::kProtocolError: return "ProtocolError";
    case ErrorCode::kEmptyCompletion: return "EmptyCompletion";
    case ErrorCode::kMetricUndefined: return "MetricUndefined";
    case ErrorCode::kEmptyResults: return "EmptyResults";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kChecksumError: return "ChecksumError";
  }
  return "Unknown";
}

/// Configuration and template problems are the caller's fault; everything
/// else is a data or runtime failure. The CLI maps these to exit codes 1 / 2.
constexpr bool is_usage_error(ErrorCode code) {
  return code == ErrorCode::kInvalidConfig || code == ErrorCode::kTemplateError;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by strict-mode ingestion; carries the 1-based offending line.
class MalformedLineError : public Error {
 public:
  MalformedLineError(std::size_t line_no, const std::string& reason)
      : Error(ErrorCode::kMalformedLine,
              "line " + std::to_string(line_no) + ": " + reason),
        line_no_(line_no) {}

  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

/// Re-throws `e` with a context prefix, keeping its code.
[[noreturn]] inline void rethrow_with_context(const Error& e, std::string_view context) {
  throw Error(e.code(), std::string(context) + ": " + e.what());
}

}  // namespace ragbench
