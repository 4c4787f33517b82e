#pragma once

// Synthetic corpora and point clouds shared by the unit and acceptance tests.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ecotopo/manifest.hpp"
#include "ecotopo/vectorize.hpp"

namespace fixtures {

// A complete browserify package.json.
std::string browserify_manifest();

std::string manifest_json(const std::string& name, const std::string& author,
                          const std::string& email, const std::string& license,
                          const std::vector<std::string>& keywords, const std::string& version,
                          int dependencies);

ecotopo::PackageManifestRecord make_record(const std::string& name, const std::string& author,
                                           const std::string& domain, const std::string& license,
                                           std::vector<std::string> keywords,
                                           const std::string& version, std::uint64_t deps);

struct CorpusShape {
  std::size_t packages = 100;
  std::size_t authors = 30;
  std::size_t domains = 30;
  std::size_t licenses = 5;
  std::size_t keywords = 30;
  std::size_t keywords_per_package = 3;
  std::uint64_t seed = 1;
};

// Every term index 0..distinct-1 of every feature is used at least once as
// long as packages >= distinct (keywords: packages * per_package >= distinct).
std::vector<ecotopo::PackageManifestRecord> synthetic_corpus(const CorpusShape& shape);

// Writes one manifest per record as <dir>/<name>.json.
void write_manifest_dir(const std::string& dir,
                        const std::vector<ecotopo::PackageManifestRecord>& records);

// A connected corpus laid out along the dependency count: every package
// shares author, domain, license and the keywords "js" and "node"; the
// first half adds `tag_low`, the second half `tag_high`.
std::vector<ecotopo::PackageManifestRecord> tagged_halves_corpus(std::size_t n,
                                                                 const std::string& tag_low,
                                                                 const std::string& tag_high);

struct Labeled {
  Eigen::MatrixXd X;
  std::vector<int> labels;
};

Labeled gaussian_blobs(const Eigen::MatrixXd& centers, std::size_t per_blob, double sigma,
                       std::uint64_t seed);

// Points on the unit circle in the plane with isotropic Gaussian noise.
Eigen::MatrixXd noisy_circle(std::size_t n, double sigma, std::uint64_t seed);

// Convex combinations of the rows of `vertices` (Dirichlet(1) weights) plus noise.
Eigen::MatrixXd simplex_mixture(const Eigen::MatrixXd& vertices, std::size_t n, double noise,
                                std::uint64_t seed);

// Wraps a bare matrix as a dataset with names p0000, p0001, ...
ecotopo::DatasetMatrix bare_dataset(const Eigen::MatrixXd& X);

std::string temp_dir(const std::string& tag);

}  // namespace fixtures
