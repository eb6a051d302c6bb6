#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace relevo {

/// Machine-readable error categories. The CLI prints them as a stable prefix
/// (`error[E_DEGENERATE]: ...`) so scripts can grep for them.
enum class ErrorCode {
  invalid_argument,
  empty_sample,
  degenerate_sample,
  no_rare_region,
  duplicate_control_point,
  anchors_undefined,
  length_mismatch,
  non_finite,
  singular_system,
  invalid_config,
  parse_error,
  io_error,
  usage,
};

inline std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "E_INVALID_ARGUMENT";
    case ErrorCode::empty_sample: return "E_EMPTY_SAMPLE";
    case ErrorCode::degenerate_sample: return "E_DEGENERATE";
    case ErrorCode::no_rare_region: return "E_NO_RARE_REGION";
    case ErrorCode::duplicate_control_point: return "E_DUPLICATE_POINT";
    case ErrorCode::anchors_undefined: return "E_ANCHORS";
    case ErrorCode::length_mismatch: return "E_LENGTH_MISMATCH";
    case ErrorCode::non_finite: return "E_NON_FINITE";
    case ErrorCode::singular_system: return "E_SINGULAR";
    case ErrorCode::invalid_config: return "E_CONFIG";
    case ErrorCode::parse_error: return "E_PARSE";
    case ErrorCode::io_error: return "E_IO";
    case ErrorCode::usage: return "E_USAGE";
  }
  return "E_UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace relevo
