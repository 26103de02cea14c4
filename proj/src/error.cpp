#include "respec/error.hpp"

namespace respec {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionUnsupported: return "VersionUnsupported";
    case ErrorCode::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::MissingMatrixFile: return "MissingMatrixFile";
    case ErrorCode::BundlePairMismatch: return "BundlePairMismatch";
    case ErrorCode::MissingModalityReferences: return "MissingModalityReferences";
    case ErrorCode::MissingAltEmbeddings: return "MissingAltEmbeddings";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::BadManifest: return "BadManifest";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ZeroNorm: return "ZeroNorm";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::POutOfRange: return "POutOfRange";
    case ErrorCode::DegenerateConcentration: return "DegenerateConcentration";
    case ErrorCode::NonPositiveKappa: return "NonPositiveKappa";
    case ErrorCode::KappaZero: return "KappaZero";
    case ErrorCode::EmptyAfterExclusion: return "EmptyAfterExclusion";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

ErrorCategory error_category(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroNorm:
    case ErrorCode::EmptyInput:
    case ErrorCode::POutOfRange:
    case ErrorCode::DegenerateConcentration:
    case ErrorCode::NonPositiveKappa:
    case ErrorCode::KappaZero:
    case ErrorCode::EmptyAfterExclusion:
    case ErrorCode::EigenFailure:
    case ErrorCode::InvalidArgument:
      return ErrorCategory::Numeric;
    default:
      return ErrorCategory::Data;
  }
}

}  // namespace respec
