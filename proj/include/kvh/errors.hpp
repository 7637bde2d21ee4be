#pragma once

#include <stdexcept>
#include <string>

namespace kvh {

enum class ErrorCode {
  invalid_argument,
  singular_region,
  domain_too_small,
  cfl_violation,
  non_finite,
  unsupported_dimension,
  support_escapes_domain,
  too_many_aborts,
  insufficient_samples,
  wrong_model_kind,
  config_error,
  io_error,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::singular_region: return "SingularRegion";
    case ErrorCode::domain_too_small: return "DomainTooSmall";
    case ErrorCode::cfl_violation: return "CflViolation";
    case ErrorCode::non_finite: return "NonFinite";
    case ErrorCode::unsupported_dimension: return "UnsupportedDimension";
    case ErrorCode::support_escapes_domain: return "SupportEscapesDomain";
    case ErrorCode::too_many_aborts: return "TooManyAborts";
    case ErrorCode::insufficient_samples: return "InsufficientSamples";
    case ErrorCode::wrong_model_kind: return "WrongModelKind";
    case ErrorCode::config_error: return "ConfigError";
    case ErrorCode::io_error: return "IoError";
  }
  return "Unknown";
}

}  // namespace kvh
