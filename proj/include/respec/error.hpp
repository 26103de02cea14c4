#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace respec {

enum class ErrorCode {
  // data / format
  DimensionMismatch,
  BadMagic,
  VersionUnsupported,
  UnsupportedDtype,
  TruncatedFile,
  CountMismatch,
  ChecksumMismatch,
  MissingMatrixFile,
  BundlePairMismatch,
  MissingModalityReferences,
  MissingAltEmbeddings,
  EmptyCorpus,
  BadManifest,
  IoError,
  // numeric
  ZeroNorm,
  EmptyInput,
  POutOfRange,
  DegenerateConcentration,
  NonPositiveKappa,
  KappaZero,
  EmptyAfterExclusion,
  EigenFailure,
  InvalidArgument,
};

enum class ErrorCategory { Data, Numeric };

std::string_view error_code_name(ErrorCode code);
ErrorCategory error_category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return error_category(code_); }

 private:
  ErrorCode code_;
};

}  // namespace respec
