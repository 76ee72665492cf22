#pragma once

#include <stdexcept>
#include <string>

namespace kslog {

/// Error categories; the numeric values double as CLI exit codes where one
/// applies (config = 2, invariant = 3, blow-up ceiling = 4).
enum class ErrorCode : int {
  InvalidArgument = 1,
  Config = 2,
  Invariant = 3,
  BlowUp = 4,
  Io = 5,
  NonConvergence = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define KSLOG_REQUIRE(cond, code, msg)          \
  do {                                          \
    if (!(cond)) throw ::kslog::Error((code), (msg)); \
  } while (0)

}  // namespace kslog
