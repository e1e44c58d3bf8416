#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wheatfx {

enum class ErrorCode {
  kFileNotFound,
  kUnsupportedFormat,
  kCorruptImage,
  kInvalidDimensions,
  kInvalidThresholds,
  kInvalidArgument,
  kEmptyMask,
  kNoValidPairs,
  kNonFiniteFeature,
  kEmptyDataset,
  kTooFewClasses,
  kClassTooSmall,
  kEmptyTrainingSet,
  kDimensionMismatch,
  kClassSetMismatch,
  kLengthMismatch,
  kLabelOutOfRange,
  kModelFormat,
  kIo,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFileNotFound: return "FileNotFound";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kCorruptImage: return "CorruptImage";
    case ErrorCode::kInvalidDimensions: return "InvalidDimensions";
    case ErrorCode::kInvalidThresholds: return "InvalidThresholds";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kNoValidPairs: return "NoValidPairs";
    case ErrorCode::kNonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kTooFewClasses: return "TooFewClasses";
    case ErrorCode::kClassTooSmall: return "ClassTooSmall";
    case ErrorCode::kEmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kClassSetMismatch: return "ClassSetMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::kModelFormat: return "ModelFormat";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by fusion when a feature is NaN or infinite; `dimension` is the
/// offset in the fused vector.
class NonFiniteFeature : public Error {
 public:
  explicit NonFiniteFeature(std::size_t dimension)
      : Error(ErrorCode::kNonFiniteFeature, "dimension " + std::to_string(dimension)),
        dimension_(dimension) {}

  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }

 private:
  std::size_t dimension_;
};

}  // namespace wheatfx
