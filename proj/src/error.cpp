#include "ecotopo/error.hpp"

namespace ecotopo {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::MissingFeature: return "MissingFeature";
    case ErrorCode::UnparseableVersion: return "UnparseableVersion";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::VocabularyTooSmall: return "VocabularyTooSmall";
    case ErrorCode::DegenerateDistances: return "DegenerateDistances";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::RankDeficientData: return "RankDeficientData";
    case ErrorCode::KNotThree: return "KNotThree";
    case ErrorCode::UnknownMember: return "UnknownMember";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

int exit_code(ErrorCode code) {
  return 3 + static_cast<int>(code);
}

std::string ManifestError::reason() const {
  std::string out(to_string(code()));
  if (!field_.empty()) out += "(" + field_ + ")";
  return out;
}

}  // namespace ecotopo
