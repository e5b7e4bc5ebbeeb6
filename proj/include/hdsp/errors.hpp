#pragma once

#include <stdexcept>
#include <string>

namespace hdsp {

// Every failure surfaced by the library carries one of these categories so the
// CLI can emit a single machine-readable line on exit.
enum class ErrorCode {
  domain,
  dimension,
  config,
  parse,
  validation,
  convergence,
  numeric,
  saturation,
  undefined_moment,
  undefined_correlation,
  unseen_word,
  io,
  version_mismatch,
  corrupt_snapshot,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::domain: return "domain_error";
    case ErrorCode::dimension: return "dimension_error";
    case ErrorCode::config: return "config_error";
    case ErrorCode::parse: return "parse_error";
    case ErrorCode::validation: return "validation_error";
    case ErrorCode::convergence: return "convergence_error";
    case ErrorCode::numeric: return "numeric_error";
    case ErrorCode::saturation: return "saturation_error";
    case ErrorCode::undefined_moment: return "undefined_moment_error";
    case ErrorCode::undefined_correlation: return "undefined_correlation_error";
    case ErrorCode::unseen_word: return "unseen_word_error";
    case ErrorCode::io: return "io_error";
    case ErrorCode::version_mismatch: return "version_mismatch_error";
    case ErrorCode::corrupt_snapshot: return "corrupt_snapshot_error";
  }
  return "unknown_error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }
  const char* code_name() const { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace hdsp
