#pragma once

#include <stdexcept>
#include <string>

namespace ewm {

enum class ErrorCode {
  InvalidArgument,
  IoError,
  ParseError,
  DegenerateCamera,
  CorruptRecord,
  ClipRejected,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& msg) {
  if (!cond) throw Error(code, msg);
}

const char* error_code_name(ErrorCode code);

}  // namespace ewm
