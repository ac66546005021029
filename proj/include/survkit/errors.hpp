#pragma once

#include <stdexcept>
#include <string>

namespace survkit {

enum class ErrorCode {
  invalid_argument = 1,
  parse_error,
  data_error,
  no_events,
  unknown_stratum,
  empty_baseline,
  schema_mismatch,
  not_converged,
  undersized_strata,
  internal,
};

// All recoverable failures in the library throw this; the C API maps the
// code to its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace survkit
