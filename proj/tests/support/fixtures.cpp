#include "support/fixtures.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "json.hpp"
#include "ecotopo/table.hpp"

namespace fixtures {

using ecotopo::PackageManifestRecord;
using ecotopo::Rng;

std::string browserify_manifest() {
  return R"({
  "name": "browserify",
  "version": "14.4.0",
  "description": "browser-side require() the node way",
  "license": "MIT",
  "repository": {
    "type": "git",
    "url": "http://github.com/substack/node-browserify.git"
  },
  "author": {
    "name": "James Halliday",
    "email": "mail@substack.net",
    "url": "http://substack.net"
  },
  "keywords": [
    "browser",
    "require",
    "commonjs",
    "commonj-esque",
    "bundle",
    "npm",
    "javascript"
  ],
  "dependencies": {
    "JSONStream": "^1.0.3",
    "assert": "^1.4.0",
    "through": "^2.3.4"
  },
  "devDependencies": {
    "tap": "^10.0.2"
  }
})";
}

std::string manifest_json(const std::string& name, const std::string& author,
                          const std::string& email, const std::string& license,
                          const std::vector<std::string>& keywords, const std::string& version,
                          int dependencies) {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["version"] = version;
  j["license"] = license;
  j["author"] = {{"name", author}, {"email", email}};
  j["keywords"] = keywords;
  nlohmann::ordered_json deps = nlohmann::ordered_json::object();
  for (int i = 0; i < dependencies; ++i) deps["dep" + std::to_string(i)] = "^1.0.0";
  j["dependencies"] = deps;
  return j.dump();
}

PackageManifestRecord make_record(const std::string& name, const std::string& author,
                                  const std::string& domain, const std::string& license,
                                  std::vector<std::string> keywords, const std::string& version,
                                  std::uint64_t deps) {
  PackageManifestRecord r;
  r.name = name;
  r.author_name = author;
  r.author_domain = domain;
  r.license = license;
  r.keywords = std::move(keywords);
  r.version_raw = version;
  r.version_scalar = ecotopo::parse_version(version).scalar();
  r.dependency_count = deps;
  return r;
}

namespace {

std::string padded(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%05zu", prefix, i);
  return buf;
}

}  // namespace

std::vector<PackageManifestRecord> synthetic_corpus(const CorpusShape& shape) {
  static const char* kLicenses[] = {"MIT", "ISC", "BSD-3-CLAUSE", "APACHE-2.0", "GPL-3.0",
                                    "BSD-2-CLAUSE", "UNLICENSE", "MPL-2.0"};
  Rng rng(shape.seed);
  std::vector<PackageManifestRecord> out;
  out.reserve(shape.packages);
  for (std::size_t i = 0; i < shape.packages; ++i) {
    const std::size_t a = i < shape.authors ? i : rng.below(shape.authors);
    const std::size_t d = i < shape.domains ? i : rng.below(shape.domains);
    const std::size_t l = i < shape.licenses ? i : rng.below(shape.licenses);
    std::vector<std::string> kws;
    for (std::size_t j = 0; j < shape.keywords_per_package; ++j) {
      const std::size_t slot = i * shape.keywords_per_package + j;
      const std::size_t k = slot < shape.keywords ? slot : rng.below(shape.keywords);
      std::string w = padded("kw", k);
      if (std::find(kws.begin(), kws.end(), w) == kws.end()) kws.push_back(w);
    }
    const std::string license =
        shape.licenses <= 8 ? kLicenses[l] : padded("LIC", l);
    const std::string version =
        std::to_string(rng.below(20)) + "." + std::to_string(rng.below(12)) + ".0";
    out.push_back(make_record(padded("pkg", i), padded("author", a),
                              padded("dom", d) + ".net", license, std::move(kws), version,
                              rng.below(40)));
  }
  return out;
}

std::vector<PackageManifestRecord> tagged_halves_corpus(std::size_t n, const std::string& tag_low,
                                                       const std::string& tag_high) {
  std::vector<PackageManifestRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(make_record(padded("pkg", i), "someone", "example.net", "MIT",
                              {"js", "node", i < n / 2 ? tag_low : tag_high}, "1.0.0", i));
  }
  return out;
}

void write_manifest_dir(const std::string& dir,
                        const std::vector<PackageManifestRecord>& records) {
  std::filesystem::create_directories(dir);
  for (const auto& r : records) {
    ecotopo::write_file(std::filesystem::path(dir) / (r.name + ".json"),
                        manifest_json(r.name, r.author_name, "dev@" + r.author_domain, r.license,
                                      r.keywords, r.version_raw,
                                      static_cast<int>(r.dependency_count)));
  }
}

Labeled gaussian_blobs(const Eigen::MatrixXd& centers, std::size_t per_blob, double sigma,
                       std::uint64_t seed) {
  Rng rng(seed);
  const auto k = centers.rows();
  const auto d = centers.cols();
  Labeled out;
  out.X.resize(k * static_cast<Eigen::Index>(per_blob), d);
  Eigen::Index row = 0;
  for (Eigen::Index c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < per_blob; ++i, ++row) {
      for (Eigen::Index j = 0; j < d; ++j) out.X(row, j) = centers(c, j) + sigma * rng.gaussian();
      out.labels.push_back(static_cast<int>(c));
    }
  }
  return out;
}

Eigen::MatrixXd noisy_circle(std::size_t n, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double t = 2.0 * M_PI * rng.uniform();
    X(i, 0) = std::cos(t) + sigma * rng.gaussian();
    X(i, 1) = std::sin(t) + sigma * rng.gaussian();
  }
  return X;
}

Eigen::MatrixXd simplex_mixture(const Eigen::MatrixXd& vertices, std::size_t n, double noise,
                                std::uint64_t seed) {
  Rng rng(seed);
  const auto k = vertices.rows();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), vertices.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    Eigen::RowVectorXd w(k);
    for (Eigen::Index j = 0; j < k; ++j) w(j) = -std::log(1.0 - rng.uniform());
    w /= w.sum();
    X.row(i) = w * vertices;
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) += noise * rng.gaussian();
  }
  return X;
}

ecotopo::DatasetMatrix bare_dataset(const Eigen::MatrixXd& X) {
  ecotopo::DatasetMatrix data;
  data.matrix = X;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    data.packages.push_back(padded("p", static_cast<std::size_t>(i)));
  }
  return data;
}

std::string temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("ecotopo_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace fixtures
