#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ecotopo {

// One code per error class; the CLI maps each to a distinct exit status.
enum class ErrorCode {
  IoFailure,
  MalformedDocument,
  MissingFeature,
  UnparseableVersion,
  EmptyCorpus,
  VocabularyTooSmall,
  DegenerateDistances,
  EmptyGraph,
  RankDeficientData,
  KNotThree,
  UnknownMember,
  InvalidArgument,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

// Process exit status for an error class (0 and 1 are reserved for success
// and unexpected failures).
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Manifest rejection carrying the offending field, e.g. MissingFeature(license).
class ManifestError : public Error {
 public:
  ManifestError(ErrorCode code, std::string field, const std::string& message)
      : Error(code, message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

  // Tally key used by the ingest report: "MissingFeature(license)",
  // "UnparseableVersion", ...
  std::string reason() const;

 private:
  std::string field_;
};

}  // namespace ecotopo
