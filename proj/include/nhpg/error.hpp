#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nhpg {

// Failure categories. The CLI maps each one to a distinct exit status.
enum class ErrorCode {
  invalid_argument,
  config,
  ingestion,
  numerical,
  io,
  artifact,
};

std::string_view error_code_name(ErrorCode code) noexcept;
int exit_status(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline Error invalid_argument(const std::string& message) {
  return Error(ErrorCode::invalid_argument, message);
}

}  // namespace nhpg
