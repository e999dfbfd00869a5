#include "mapkit/error.hpp"

namespace mapkit {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedManifest: return "MalformedManifest";
    case ErrorCode::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::UnwritableDtype: return "UnwritableDtype";
    case ErrorCode::NameNotFound: return "NameNotFound";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::InvalidSeries: return "InvalidSeries";
    case ErrorCode::AnchorNotFound: return "AnchorNotFound";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::IncompatibleArchives: return "IncompatibleArchives";
    case ErrorCode::DuplicateRecord: return "DuplicateRecord";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::GreedyArityViolation: return "GreedyArityViolation";
    case ErrorCode::NoMatchingRecords: return "NoMatchingRecords";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::AllTied: return "AllTied";
    case ErrorCode::TooFewModels: return "TooFewModels";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "Unknown";
}

}  // namespace mapkit
