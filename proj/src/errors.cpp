#include "formine/errors.hpp"

namespace formine {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::empty_bundle: return "empty_bundle";
    case ErrorCode::no_main_file: return "no_main_file";
    case ErrorCode::include_cycle: return "include_cycle";
    case ErrorCode::unbalanced_braces: return "unbalanced_braces";
    case ErrorCode::expansion_depth_exceeded: return "expansion_depth_exceeded";
    case ErrorCode::malformed_definition: return "malformed_definition";
    case ErrorCode::shape_mismatch: return "shape_mismatch";
    case ErrorCode::empty_reference: return "empty_reference";
    case ErrorCode::engine_missing: return "engine_missing";
    case ErrorCode::empty_crop: return "empty_crop";
    case ErrorCode::bad_archive: return "bad_archive";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::bad_argument: return "bad_argument";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void raise(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace formine
