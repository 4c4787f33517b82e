#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ecotopo {

// One package's six raw features (f1..f6) taken from its package.json.
struct PackageManifestRecord {
  std::string name;
  std::string author_name;    // f1
  std::string author_domain;  // f2, email part after the last '@'
  std::string license;        // f3, uppercased
  std::vector<std::string> keywords;  // f4, lowercased, deduplicated
  std::string version_raw;
  double version_scalar = 0.0;  // f5, major + minor / 10^digits(minor)
  std::uint64_t dependency_count = 0;  // f6

  bool operator==(const PackageManifestRecord&) const = default;
};

struct IngestReport {
  std::uint64_t total_seen = 0;
  std::uint64_t accepted = 0;
  std::map<std::string, std::uint64_t> rejected_by_reason;
  std::uint64_t sample_size = 0;
  std::uint64_t seed = 0;

  std::uint64_t rejected() const;
};

// Leading "major.minor" of a version string.
struct ParsedVersion {
  std::uint64_t major = 0;
  std::uint64_t minor = 0;
  std::string minor_digits;  // as written, "0" when absent

  double scalar() const;
  // "major.minor" bucket key, e.g. "14.4" or "1.10".
  std::string bucket() const;
};

// Strips a leading v/V, reads "major[.minor]" and ignores the rest.
// Throws ManifestError(UnparseableVersion).
ParsedVersion parse_version(std::string_view raw);

// Throws ManifestError with MalformedDocument, MissingFeature(field) or
// UnparseableVersion.
PackageManifestRecord parse_manifest(std::string_view raw);

struct IngestResult {
  std::vector<PackageManifestRecord> records;  // sorted by name
  IngestReport report;
};

// `path` is either a directory of *.json manifests (searched recursively)
// or a file holding one manifest per line. Records with a duplicate name
// keep the highest version (then the smallest canonical form) and the rest
// are tallied under "DuplicateName".
IngestResult ingest_corpus(const std::filesystem::path& path);

// Uniform sample of min(n, records.size()) records without replacement,
// returned sorted by name.
std::vector<PackageManifestRecord> sample_packages(
    const std::vector<PackageManifestRecord>& records, std::size_t n,
    std::uint64_t seed);

// Canonical record format: one JSON object per line with the record's
// field names.
std::string to_record_line(const PackageManifestRecord& record);
PackageManifestRecord from_record_line(std::string_view line);
std::string write_records(const std::vector<PackageManifestRecord>& records);
std::vector<PackageManifestRecord> read_records(std::string_view text);

std::string to_json(const IngestReport& report);

}  // namespace ecotopo
