#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace srqa {

/// Domain error categories. The CLI reports these names verbatim.
enum class ErrorKind {
  InvalidArgument,
  FileNotFound,
  UnsupportedFormat,
  IoError,
  DimensionMismatch,
  DimensionTooSmall,
  TooSmall,
  EmptyInput,
  ZeroTotal,
  EmptyClass,
  GridMismatch,
  BothEmpty,
  EmptyGroundTruth,
  ZeroBaseline,
  DegenerateVariance,
  SchemaError,
  MissingFile,
  DuplicatePairId,
  EmptyManifest,
  MissingPsnr,
  InvalidTemplate,
  NonZeroExit,
  Timeout,
  BadOutputDims,
  MissingOutput,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorKind::TooSmall: return "TooSmall";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::ZeroTotal: return "ZeroTotal";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::BothEmpty: return "BothEmpty";
    case ErrorKind::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorKind::ZeroBaseline: return "ZeroBaseline";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::DuplicatePairId: return "DuplicatePairId";
    case ErrorKind::EmptyManifest: return "EmptyManifest";
    case ErrorKind::MissingPsnr: return "MissingPsnr";
    case ErrorKind::InvalidTemplate: return "InvalidTemplate";
    case ErrorKind::NonZeroExit: return "NonZeroExit";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::BadOutputDims: return "BadOutputDims";
    case ErrorKind::MissingOutput: return "MissingOutput";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable kind alongside the message.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return to_string(kind_); }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

} // namespace srqa
