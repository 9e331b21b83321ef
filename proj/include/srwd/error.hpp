#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace srwd {

/// Error classes surfaced by the library. The CLI maps each one to a distinct
/// exit code, so append new values at the end.
enum class ErrorCode {
  KernelTooLarge = 1,
  BadScale,
  NonDivisibleDims,
  BadSize,
  BadShape,
  BadInterval,
  BadSide,
  BadAlpha,
  SingularDenominator,
  StaleCache,
  ShapeMismatch,
  ScaleMismatch,
  EmptyInputDir,
  ImageTooSmall,
  EmptyManifest,
  IoError,
  VersionMismatch,
  CorruptFile,
  BadFlag,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::KernelTooLarge: return "KernelTooLarge";
    case ErrorCode::BadScale: return "BadScale";
    case ErrorCode::NonDivisibleDims: return "NonDivisibleDims";
    case ErrorCode::BadSize: return "BadSize";
    case ErrorCode::BadShape: return "BadShape";
    case ErrorCode::BadInterval: return "BadInterval";
    case ErrorCode::BadSide: return "BadSide";
    case ErrorCode::BadAlpha: return "BadAlpha";
    case ErrorCode::SingularDenominator: return "SingularDenominator";
    case ErrorCode::StaleCache: return "StaleCache";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ScaleMismatch: return "ScaleMismatch";
    case ErrorCode::EmptyInputDir: return "EmptyInputDir";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::EmptyManifest: return "EmptyManifest";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::BadFlag: return "BadFlag";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

}  // namespace srwd
