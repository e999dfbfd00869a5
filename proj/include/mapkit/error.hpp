#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mapkit {

// Stable identifiers; the CLI prints them as `ERROR[<name>]`.
enum class ErrorCode {
  MalformedManifest,
  UnsupportedDtype,
  UnwritableDtype,
  NameNotFound,
  IoFailure,
  InvalidSeries,
  AnchorNotFound,
  InsufficientHistory,
  IncompatibleArchives,
  DuplicateRecord,
  MalformedLine,
  GreedyArityViolation,
  NoMatchingRecords,
  DomainError,
  InsufficientSamples,
  TooFewPoints,
  AllTied,
  TooFewModels,
  SchemaMismatch,
  ConfigError,
  UsageError,
};

[[nodiscard]] std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mapkit
