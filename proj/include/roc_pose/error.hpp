#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace roc_pose {

enum class ErrorKind {
  kInvalidArgument,
  kDimensionMismatch,
  kDegenerateCloud,
  kInsufficientCorrespondences,
  kDegenerateGeometry,
  kNoConsensus,
  kIo,
  kFormat,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kDegenerateCloud: return "DegenerateCloud";
    case ErrorKind::kInsufficientCorrespondences:
      return "InsufficientCorrespondences";
    case ErrorKind::kDegenerateGeometry: return "DegenerateGeometry";
    case ErrorKind::kNoConsensus: return "NoConsensus";
    case ErrorKind::kIo: return "Io";
    case ErrorKind::kFormat: return "Format";
  }
  return "Unknown";
}

// Every failure in the library is reported through this type; kind() lets
// callers (the tracker, the CLI) decide between "miss" and "abort".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace roc_pose
