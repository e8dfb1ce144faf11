#include "nhpg/error.hpp"

namespace nhpg {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "E_ARGUMENT";
    case ErrorCode::config: return "E_CONFIG";
    case ErrorCode::ingestion: return "E_INGEST";
    case ErrorCode::numerical: return "E_NUMERICAL";
    case ErrorCode::io: return "E_IO";
    case ErrorCode::artifact: return "E_ARTIFACT";
  }
  return "E_UNKNOWN";
}

int exit_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return 2;
    case ErrorCode::config: return 3;
    case ErrorCode::ingestion: return 4;
    case ErrorCode::numerical: return 5;
    case ErrorCode::io: return 6;
    case ErrorCode::artifact: return 7;
  }
  return 1;
}

}  // namespace nhpg
