#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cla {

enum class ErrorCode {
  invalid_argument,
  invalid_action,
  terminal_state,
  enumeration_cap,
  vocabulary_too_small,
  domain_mismatch,
  support_mismatch,
  not_normalized,
  transport_cap,
  too_few_episodes,
  empty_dataset,
  foreign_record,
  missing_listener_model,
  parse_error,
  fingerprint_mismatch,
  format_version,
  io_error,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::invalid_action: return "invalid-action";
    case ErrorCode::terminal_state: return "terminal-state";
    case ErrorCode::enumeration_cap: return "enumeration-cap";
    case ErrorCode::vocabulary_too_small: return "vocabulary-too-small";
    case ErrorCode::domain_mismatch: return "domain-mismatch";
    case ErrorCode::support_mismatch: return "support-mismatch";
    case ErrorCode::not_normalized: return "not-normalized";
    case ErrorCode::transport_cap: return "transport-cap";
    case ErrorCode::too_few_episodes: return "too-few-episodes";
    case ErrorCode::empty_dataset: return "empty-dataset";
    case ErrorCode::foreign_record: return "foreign-record";
    case ErrorCode::missing_listener_model: return "missing-listener-model";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::fingerprint_mismatch: return "fingerprint-mismatch";
    case ErrorCode::format_version: return "format-version";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace cla
