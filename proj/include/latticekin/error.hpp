#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace latticekin {

enum class ErrorCode {
  degenerate_bands,
  unsupported_channel,
  table_too_large,
  step_underflow,
  insufficient_data,
  empty_region,
  parse_error,
  validation_error,
  io_error,
  corrupt_file,
};

std::string_view to_string(ErrorCode code);

/// Exception type for every recoverable failure in the library. The code
/// lets the CLI map failures onto its exit-status contract.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace latticekin
