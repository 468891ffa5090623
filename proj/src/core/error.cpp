#include "core/error.hpp"

namespace ewm {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::IoError: return "io_error";
    case ErrorCode::ParseError: return "parse_error";
    case ErrorCode::DegenerateCamera: return "degenerate_camera";
    case ErrorCode::CorruptRecord: return "corrupt_record";
    case ErrorCode::ClipRejected: return "clip_rejected";
    case ErrorCode::Internal: return "internal";
  }
  return "unknown";
}

}  // namespace ewm
