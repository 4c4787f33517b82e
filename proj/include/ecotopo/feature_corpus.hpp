#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "ecotopo/manifest.hpp"

namespace ecotopo {

enum class Feature { Author, AuthorDomain, License, Keywords, Version, Dependencies };

// "f1".."f6"
std::string_view feature_tag(Feature f);
// Human label as used in report headers, e.g. "Author Domain (f2)".
std::string feature_label(Feature f);
Feature parse_feature(std::string_view tag);

inline constexpr std::array<Feature, 4> kTermFeatures = {
    Feature::Author, Feature::AuthorDomain, Feature::License, Feature::Keywords};

// The single term a record carries for f1..f3.
const std::string& single_term(const PackageManifestRecord& record, Feature f);

struct TermCount {
  std::string term;
  std::uint64_t frequency = 0;

  bool operator==(const TermCount&) const = default;
};

// Top-K terms of one feature by package frequency, ties lexicographic.
struct TermRanking {
  Feature feature = Feature::Author;
  std::vector<TermCount> terms;
  std::size_t k_cap = 0;
};

using TermRankings = std::map<Feature, TermRanking>;

// Document frequencies for f1..f4; a term counts once per package.
TermRankings build_term_rankings(const std::vector<PackageManifestRecord>& records,
                                 std::size_t k);

// Full (uncapped) frequency ranking of one of f1..f4.
std::vector<TermCount> rank_terms(const std::vector<PackageManifestRecord>& records,
                                  Feature feature);

struct EmbeddingOptions {
  std::size_t dimension = 50;
  std::uint64_t min_count = 2;
  std::size_t max_vocabulary = 500;
};

// Keyword vectors from the positive-PMI co-occurrence matrix: rows of
// U * sqrt(max(lambda, 0)) over the leading eigenpairs.
struct KeywordEmbedding {
  std::vector<std::string> vocabulary;  // frequency-ranked
  std::vector<std::uint64_t> frequencies;
  Eigen::MatrixXd vectors;              // |vocabulary| x dimension
  Eigen::VectorXd eigenvalues;          // descending, length dimension
  std::size_t dimension = 0;
  std::unordered_map<std::string, std::size_t> index;

  // -1 when out of vocabulary.
  std::ptrdiff_t find(std::string_view word) const;
};

// Package-level co-occurrence counts between distinct vocabulary words.
Eigen::MatrixXd cooccurrence_matrix(const std::vector<PackageManifestRecord>& records,
                                    const std::vector<std::string>& vocabulary);
Eigen::MatrixXd ppmi(const Eigen::MatrixXd& counts);

KeywordEmbedding train_keyword_embedding(const std::vector<PackageManifestRecord>& records,
                                         const EmbeddingOptions& options = {});

// 1 for identical words (in vocabulary or not), max(0, cosine) for two
// vocabulary words, 0 otherwise.
double keyword_similarity(const KeywordEmbedding& embedding, std::string_view w1,
                          std::string_view w2);

// feature, rank, term, frequency
std::string export_rankings(const TermRankings& rankings);
TermRankings import_rankings(std::string_view text);
// term, frequency, v1..vd
std::string export_embedding(const KeywordEmbedding& embedding);

}  // namespace ecotopo
