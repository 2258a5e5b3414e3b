#pragma once

#include <stdexcept>
#include <string>

namespace asep {

// Numeric values are shared with the C API (asep_status in asep_lab.h).
enum class ErrorCode : int {
  Domain = 1,
  Convergence = 2,
  Consistency = 3,
  Singular = 4,
  WindowViolation = 5,
  Unsupported = 6,
  Range = 7,
  Precision = 8,
  Degenerate = 9,
  IdentityFailure = 10,
};

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

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace asep
