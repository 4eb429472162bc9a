#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace kpslam {

// Machine-readable error classes. The CLI prints the class name on failure.
enum class ErrorCode {
  kInvalidArgument,
  kBehindCamera,
  kNonUniqueLogarithm,
  kDegenerateBaseline,
  kIllConditioned,
  kDegenerateAlignment,
  kIllPosedProblem,
  kTooSmallImage,
  kIncompatibleDescriptors,
  kMalformedFile,
  kIoError,
  kCoarseAlignmentFailed,
  kTrackingLost,
  kTooShortSequence,
  kTooFewPairs,
  kConfigError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Raised by binary readers; carries the byte offset where parsing failed.
class MalformedFileError : public Error {
 public:
  MalformedFileError(std::uint64_t offset, const std::string& what)
      : Error(ErrorCode::kMalformedFile,
              what + " at byte offset " + std::to_string(offset)),
        offset_(offset) {}

  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kBehindCamera: return "behind_camera";
    case ErrorCode::kNonUniqueLogarithm: return "non_unique_logarithm";
    case ErrorCode::kDegenerateBaseline: return "degenerate_baseline";
    case ErrorCode::kIllConditioned: return "ill_conditioned";
    case ErrorCode::kDegenerateAlignment: return "degenerate_alignment";
    case ErrorCode::kIllPosedProblem: return "ill_posed_problem";
    case ErrorCode::kTooSmallImage: return "too_small_image";
    case ErrorCode::kIncompatibleDescriptors: return "incompatible_descriptors";
    case ErrorCode::kMalformedFile: return "malformed_file";
    case ErrorCode::kIoError: return "io_error";
    case ErrorCode::kCoarseAlignmentFailed: return "coarse_alignment_failed";
    case ErrorCode::kTrackingLost: return "tracking_lost";
    case ErrorCode::kTooShortSequence: return "too_short_sequence";
    case ErrorCode::kTooFewPairs: return "too_few_pairs";
    case ErrorCode::kConfigError: return "config_error";
  }
  return "unknown";
}

}  // namespace kpslam
