#pragma once

#include <stdexcept>
#include <string>

namespace miss {

enum class ErrorKind {
  io,
  unsupported_format,
  invalid_argument,
  empty_mask,
  degenerate_contour,
  dimension_mismatch,
  collapsed_contour,
  not_found,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return "io";
    case ErrorKind::unsupported_format: return "unsupported_format";
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::empty_mask: return "empty_mask";
    case ErrorKind::degenerate_contour: return "degenerate_contour";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::collapsed_contour: return "collapsed_contour";
    case ErrorKind::not_found: return "not_found";
  }
  return "unknown";
}

// Every failure raised by the library. `stage` names the pipeline stage
// (e.g. "extract_contour", "modify_fd") when the error comes out of synthesis.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string stage = {})
      : std::runtime_error(message), kind_(kind), stage_(std::move(stage)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }

  Error with_stage(std::string stage) const { return Error(kind_, what(), std::move(stage)); }

 private:
  ErrorKind kind_;
  std::string stage_;
};

}  // namespace miss
