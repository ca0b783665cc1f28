#pragma once

#include <stdexcept>
#include <string>

namespace plantres {

enum class ErrorCode {
  kInvalidArgument = 1,
  kParse,
  kSchema,
  kInvalidBox,
  kRange,
  kUniqueness,
  kDanglingReference,
  kUndefined,
  kDegenerate,
  kSize,
  kIo,
  kConfig,
};

const char* error_code_name(ErrorCode code);

/// Exception carrying a machine-readable category alongside the message.
/// Every failure raised by the library is an Error; the C API maps the code
/// one-to-one onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace plantres
