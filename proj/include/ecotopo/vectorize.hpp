#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ecotopo/feature_corpus.hpp"
#include "ecotopo/manifest.hpp"

namespace ecotopo {

struct Segment {
  Feature feature;
  std::size_t offset = 0;
  std::size_t width = 0;
};

// Column layout of the assembled vector: f1, f2, f3, f4 term blocks
// followed by the f5 and f6 scalars.
struct VectorLayout {
  std::vector<Segment> segments;
  std::vector<std::string> column_names;  // "f3:MIT", "f5:version", ...
  std::size_t total_dim = 0;

  const Segment& segment(Feature f) const;
};

VectorLayout make_layout(const TermRankings& rankings);

struct RawScalars {
  double version_scalar = 0.0;
  double dependency_count = 0.0;
};

struct DatasetMatrix {
  VectorLayout layout;
  std::vector<std::string> packages;  // sorted by name
  Eigen::MatrixXd matrix;             // packages.size() x layout.total_dim
  std::vector<RawScalars> raw_scalars;

  std::size_t rows() const { return packages.size(); }
};

// 0/1 indicator over an f1, f2 or f3 ranking.
Eigen::VectorXd encode_binary_segment(const PackageManifestRecord& record,
                                      const TermRanking& ranking);

// Entry j = max over the record's keywords of keyword_similarity(w, term j).
Eigen::VectorXd encode_keyword_segment(const PackageManifestRecord& record,
                                       const TermRanking& ranking,
                                       const KeywordEmbedding& embedding);

// Min-max scaled (f5, f6) per record; constant columns map to 0.
std::vector<std::pair<double, double>> encode_scalars(
    const std::vector<PackageManifestRecord>& records);

struct VectorizeOptions {
  bool scale_scalars = true;
  unsigned threads = 1;
};

DatasetMatrix assemble_dataset(std::vector<PackageManifestRecord> records,
                               const TermRankings& rankings,
                               const KeywordEmbedding& embedding,
                               const VectorizeOptions& options = {});

// Header "package" + column names; one row per package.
std::string export_dataset(const DatasetMatrix& data);
// Rebuilds layout, names and matrix; raw scalars are left empty.
DatasetMatrix import_dataset(std::string_view text);

}  // namespace ecotopo
