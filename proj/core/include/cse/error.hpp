#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cse {

enum class ErrorCode {
  kInvalidDimension,
  kHorizonExceeded,
  kNoData,
  kDomain,
  kBudgetExhausted,
  kInvalidProfile,
  kPrecondition,
  kParameter,
  kUnsupported,
  kParse,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (the harness in particular) can record it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cse
