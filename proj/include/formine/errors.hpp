#pragma once

#include <stdexcept>
#include <string>

namespace formine {

enum class ErrorCode {
  empty_bundle,
  no_main_file,
  include_cycle,
  unbalanced_braces,
  expansion_depth_exceeded,
  malformed_definition,
  shape_mismatch,
  empty_reference,
  engine_missing,
  empty_crop,
  bad_archive,
  io_error,
  bad_argument,
};

const char* to_string(ErrorCode code);

/// Hard failure of a pipeline operation. Soft conditions (missing includes,
/// arity mismatches, ...) are reported through a Warnings sink instead.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

}  // namespace formine
