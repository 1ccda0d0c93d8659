#pragma once

#include <stdexcept>
#include <string>

namespace ksrobust {

enum class ErrorCode {
  kInvalidParameter,
  kBudgetExceeded,
  kIo,
  kTimeout,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter:
      return "invalid-parameter";
    case ErrorCode::kBudgetExceeded:
      return "budget-exceeded";
    case ErrorCode::kIo:
      return "io";
    case ErrorCode::kTimeout:
      return "timeout";
  }
  return "unknown";
}

/// Single exception type for the library; the code distinguishes the cases
/// callers are expected to branch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, const std::string& what,
                    ErrorCode code = ErrorCode::kInvalidParameter) {
  if (!condition) throw Error(code, what);
}

}  // namespace ksrobust
