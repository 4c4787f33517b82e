#include "ecotopo/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "ecotopo/error.hpp"
#include "ecotopo/table.hpp"
#include "json.hpp"

namespace ecotopo {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

[[noreturn]] void missing(const std::string& field) {
  throw ManifestError(ErrorCode::MissingFeature, field,
                      "manifest lacks feature '" + field + "'");
}

std::string string_field(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_string()) return {};
  return trim(it->get_ref<const std::string&>());
}

struct Author {
  std::string name;
  std::string email;
};

// "Name <email> (url)"
Author parse_author_string(std::string_view text) {
  Author author;
  auto lt = text.find('<');
  auto paren = text.find('(');
  auto name_end = std::min(lt, paren);
  author.name = trim(text.substr(0, name_end));
  if (lt != std::string_view::npos) {
    auto gt = text.find('>', lt);
    if (gt != std::string_view::npos) {
      author.email = trim(text.substr(lt + 1, gt - lt - 1));
    }
  }
  return author;
}

Author parse_author(const json& doc) {
  auto it = doc.find("author");
  if (it == doc.end()) return {};
  if (it->is_string()) return parse_author_string(it->get_ref<const std::string&>());
  if (it->is_object()) return {string_field(*it, "name"), string_field(*it, "email")};
  return {};
}

std::string parse_license(const json& doc) {
  auto it = doc.find("license");
  if (it == doc.end()) return {};
  if (it->is_string()) return upper(trim(it->get_ref<const std::string&>()));
  if (it->is_object()) return upper(string_field(*it, "type"));
  return {};
}

std::vector<std::string> parse_keywords(const json& doc) {
  std::vector<std::string> raw;
  auto it = doc.find("keywords");
  if (it == doc.end()) return raw;
  if (it->is_array()) {
    for (const auto& k : *it) {
      if (k.is_string()) raw.push_back(k.get<std::string>());
    }
  } else if (it->is_string()) {
    // Some legacy manifests give a single comma-separated string.
    const auto& s = it->get_ref<const std::string&>();
    std::size_t start = 0;
    for (;;) {
      auto comma = s.find(',', start);
      raw.push_back(s.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (auto& k : raw) {
    std::string norm = lower(trim(k));
    if (norm.empty() || !seen.insert(norm).second) continue;
    out.push_back(std::move(norm));
  }
  return out;
}

}  // namespace

std::uint64_t IngestReport::rejected() const {
  std::uint64_t total = 0;
  for (const auto& [reason, count] : rejected_by_reason) total += count;
  return total;
}

double ParsedVersion::scalar() const {
  return static_cast<double>(major) +
         static_cast<double>(minor) /
             std::pow(10.0, static_cast<double>(minor_digits.size()));
}

std::string ParsedVersion::bucket() const {
  return std::to_string(major) + "." + minor_digits;
}

ParsedVersion parse_version(std::string_view raw) {
  std::string_view s = raw;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  if (!s.empty() && (s.front() == 'v' || s.front() == 'V')) s.remove_prefix(1);

  auto read_digits = [&s]() {
    std::size_t n = 0;
    while (n < s.size() && std::isdigit(static_cast<unsigned char>(s[n]))) ++n;
    std::string digits(s.substr(0, n));
    s.remove_prefix(n);
    return digits;
  };

  std::string major = read_digits();
  if (major.empty() || major.size() > 18) {
    throw ManifestError(ErrorCode::UnparseableVersion, "",
                        "unparseable version '" + std::string(raw) + "'");
  }
  ParsedVersion v;
  v.major = std::stoull(major);
  v.minor_digits = "0";
  if (!s.empty() && s.front() == '.') {
    s.remove_prefix(1);
    std::string minor = read_digits();
    if (!minor.empty() && minor.size() <= 18) {
      v.minor = std::stoull(minor);
      v.minor_digits = minor;
    }
  }
  return v;
}

PackageManifestRecord parse_manifest(std::string_view raw) {
  json doc = json::parse(raw.begin(), raw.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ManifestError(ErrorCode::MalformedDocument, "",
                        "manifest is not a JSON object");
  }

  PackageManifestRecord rec;
  rec.name = string_field(doc, "name");
  if (rec.name.empty()) missing("name");

  Author author = parse_author(doc);
  rec.author_name = author.name;
  if (rec.author_name.empty()) missing("author_name");
  auto at = author.email.rfind('@');
  if (at != std::string::npos) rec.author_domain = lower(trim(author.email.substr(at + 1)));
  if (rec.author_domain.empty()) missing("author_domain");

  rec.license = parse_license(doc);
  if (rec.license.empty()) missing("license");

  rec.keywords = parse_keywords(doc);
  if (rec.keywords.empty()) missing("keywords");

  auto vit = doc.find("version");
  if (vit != doc.end() && vit->is_string()) rec.version_raw = trim(vit->get_ref<const std::string&>());
  if (rec.version_raw.empty()) missing("version_raw");
  rec.version_scalar = parse_version(rec.version_raw).scalar();

  auto dit = doc.find("dependencies");
  if (dit == doc.end() || !dit->is_object()) missing("dependency_count");
  rec.dependency_count = dit->size();
  return rec;
}

std::string to_record_line(const PackageManifestRecord& r) {
  json j = json::object();
  j["name"] = r.name;
  j["author_name"] = r.author_name;
  j["author_domain"] = r.author_domain;
  j["license"] = r.license;
  j["keywords"] = r.keywords;
  j["version_raw"] = r.version_raw;
  j["version_scalar"] = r.version_scalar;
  j["dependency_count"] = r.dependency_count;
  return j.dump();
}

PackageManifestRecord from_record_line(std::string_view line) {
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::MalformedDocument, "record line is not a JSON object");
  }
  try {
    PackageManifestRecord r;
    r.name = j.at("name").get<std::string>();
    r.author_name = j.at("author_name").get<std::string>();
    r.author_domain = j.at("author_domain").get<std::string>();
    r.license = j.at("license").get<std::string>();
    r.keywords = j.at("keywords").get<std::vector<std::string>>();
    r.version_raw = j.at("version_raw").get<std::string>();
    r.version_scalar = j.at("version_scalar").get<double>();
    r.dependency_count = j.at("dependency_count").get<std::uint64_t>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("bad record: ") + e.what());
  }
}

std::string write_records(const std::vector<PackageManifestRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_record_line(r);
    out += '\n';
  }
  return out;
}

std::vector<PackageManifestRecord> read_records(std::string_view text) {
  std::vector<PackageManifestRecord> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    if (trim(line).empty()) continue;
    out.push_back(from_record_line(line));
  }
  return out;
}

IngestResult ingest_corpus(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::exists(path, ec)) {
    throw Error(ErrorCode::IoFailure, "input path does not exist: " + path.string());
  }

  std::vector<std::string> documents;
  if (fs::is_directory(path, ec)) {
    std::vector<fs::path> files;
    for (fs::recursive_directory_iterator it(path, ec), end; it != end; it.increment(ec)) {
      if (ec) throw Error(ErrorCode::IoFailure, "cannot list " + path.string());
      if (it->is_regular_file() && it->path().extension() == ".json") files.push_back(it->path());
    }
    if (ec) throw Error(ErrorCode::IoFailure, "cannot list " + path.string());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) documents.push_back(read_file(f));
  } else {
    std::string text = read_file(path);
    std::size_t start = 0;
    while (start < text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      std::string line = text.substr(start, end - start);
      start = end + 1;
      if (!trim(line).empty()) documents.push_back(std::move(line));
    }
  }

  IngestResult result;
  result.report.total_seen = documents.size();
  std::vector<PackageManifestRecord> parsed;
  for (const auto& doc : documents) {
    try {
      parsed.push_back(parse_manifest(doc));
    } catch (const ManifestError& e) {
      ++result.report.rejected_by_reason[e.reason()];
    }
  }

  // Among records sharing a name, keep the highest version, then the
  // smallest canonical line, so the survivor does not depend on visit order.
  std::vector<std::string> lines;
  lines.reserve(parsed.size());
  for (const auto& r : parsed) lines.push_back(to_record_line(r));
  std::vector<std::size_t> order(parsed.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (parsed[a].name != parsed[b].name) return parsed[a].name < parsed[b].name;
    if (parsed[a].version_scalar != parsed[b].version_scalar) {
      return parsed[a].version_scalar > parsed[b].version_scalar;
    }
    return lines[a] < lines[b];
  });
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (!result.records.empty() && parsed[order[i]].name == result.records.back().name) {
      ++result.report.rejected_by_reason["DuplicateName"];
      continue;
    }
    result.records.push_back(std::move(parsed[order[i]]));
  }

  result.report.accepted = result.records.size();
  result.report.sample_size = result.records.size();
  if (result.records.empty()) {
    throw Error(ErrorCode::EmptyCorpus,
                "no manifest in " + path.string() + " carries all six features");
  }
  return result;
}

std::vector<PackageManifestRecord> sample_packages(
    const std::vector<PackageManifestRecord>& records, std::size_t n,
    std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "sample size must be >= 1");
  std::vector<std::size_t> idx(records.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::size_t take = std::min(n, records.size());
  Rng rng(seed);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < take; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<PackageManifestRecord> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(records[idx[i]]);
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

std::string to_json(const IngestReport& report) {
  json j = json::object();
  j["total_seen"] = report.total_seen;
  j["accepted"] = report.accepted;
  j["rejected_by_reason"] = report.rejected_by_reason;
  j["sample_size"] = report.sample_size;
  j["seed"] = report.seed;
  return j.dump(2) + "\n";
}

}  // namespace ecotopo
