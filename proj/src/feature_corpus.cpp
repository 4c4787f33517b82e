#include "ecotopo/feature_corpus.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "ecotopo/error.hpp"
#include "ecotopo/linalg.hpp"
#include "ecotopo/table.hpp"

namespace ecotopo {

std::string_view feature_tag(Feature f) {
  switch (f) {
    case Feature::Author: return "f1";
    case Feature::AuthorDomain: return "f2";
    case Feature::License: return "f3";
    case Feature::Keywords: return "f4";
    case Feature::Version: return "f5";
    case Feature::Dependencies: return "f6";
  }
  return "f?";
}

std::string feature_label(Feature f) {
  switch (f) {
    case Feature::Author: return "Author (f1)";
    case Feature::AuthorDomain: return "Author Domain (f2)";
    case Feature::License: return "License (f3)";
    case Feature::Keywords: return "Tagged Keywords (f4)";
    case Feature::Version: return "Versions (f5)";
    case Feature::Dependencies: return "# Dependencies (f6)";
  }
  return "?";
}

Feature parse_feature(std::string_view tag) {
  static const Feature all[] = {Feature::Author,   Feature::AuthorDomain, Feature::License,
                                Feature::Keywords, Feature::Version,      Feature::Dependencies};
  for (Feature f : all) {
    if (feature_tag(f) == tag) return f;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown feature '" + std::string(tag) + "'");
}

const std::string& single_term(const PackageManifestRecord& record, Feature f) {
  switch (f) {
    case Feature::Author: return record.author_name;
    case Feature::AuthorDomain: return record.author_domain;
    case Feature::License: return record.license;
    default:
      throw Error(ErrorCode::InvalidArgument,
                  std::string(feature_tag(f)) + " is not a single-term feature");
  }
}

std::vector<TermCount> rank_terms(const std::vector<PackageManifestRecord>& records,
                                  Feature feature) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& r : records) {
    if (feature == Feature::Keywords) {
      std::set<std::string_view> seen;
      for (const auto& k : r.keywords) {
        if (seen.insert(k).second) ++counts[k];
      }
    } else {
      ++counts[single_term(r, feature)];
    }
  }
  std::vector<TermCount> ranked;
  ranked.reserve(counts.size());
  for (auto& [term, n] : counts) ranked.push_back({term, n});
  std::sort(ranked.begin(), ranked.end(), [](const TermCount& a, const TermCount& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.term < b.term;
  });
  return ranked;
}

TermRankings build_term_rankings(const std::vector<PackageManifestRecord>& records,
                                 std::size_t k) {
  if (records.empty()) throw Error(ErrorCode::EmptyCorpus, "no records to rank");
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "top-k must be >= 1");
  TermRankings out;
  for (Feature f : kTermFeatures) {
    TermRanking ranking;
    ranking.feature = f;
    ranking.k_cap = k;
    ranking.terms = rank_terms(records, f);
    if (ranking.terms.size() > k) ranking.terms.resize(k);
    out.emplace(f, std::move(ranking));
  }
  return out;
}

std::ptrdiff_t KeywordEmbedding::find(std::string_view word) const {
  auto it = index.find(std::string(word));
  return it == index.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

Eigen::MatrixXd cooccurrence_matrix(const std::vector<PackageManifestRecord>& records,
                                    const std::vector<std::string>& vocabulary) {
  std::unordered_map<std::string, Eigen::Index> pos;
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    pos.emplace(vocabulary[i], static_cast<Eigen::Index>(i));
  }
  const auto v = static_cast<Eigen::Index>(vocabulary.size());
  // Integer accumulation, converted once at the end.
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(v * v), 0);
  std::vector<Eigen::Index> present;
  for (const auto& r : records) {
    present.clear();
    for (const auto& k : r.keywords) {
      auto it = pos.find(k);
      if (it != pos.end()) present.push_back(it->second);
    }
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());
    for (std::size_t a = 0; a < present.size(); ++a) {
      for (std::size_t b = a + 1; b < present.size(); ++b) {
        ++counts[static_cast<std::size_t>(present[a] * v + present[b])];
        ++counts[static_cast<std::size_t>(present[b] * v + present[a])];
      }
    }
  }
  Eigen::MatrixXd m(v, v);
  for (Eigen::Index i = 0; i < v; ++i) {
    for (Eigen::Index j = 0; j < v; ++j) {
      m(i, j) = static_cast<double>(counts[static_cast<std::size_t>(i * v + j)]);
    }
  }
  return m;
}

Eigen::MatrixXd ppmi(const Eigen::MatrixXd& counts) {
  const double total = counts.sum();
  Eigen::VectorXd row = counts.rowwise().sum();
  Eigen::VectorXd col = counts.colwise().sum().transpose();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(counts.rows(), counts.cols());
  if (total <= 0.0) return out;
  for (Eigen::Index i = 0; i < counts.rows(); ++i) {
    for (Eigen::Index j = 0; j < counts.cols(); ++j) {
      double c = counts(i, j);
      if (c <= 0.0) continue;
      double pmi = std::log(c * total / (row(i) * col(j)));
      out(i, j) = pmi > 0.0 ? pmi : 0.0;
    }
  }
  return out;
}

KeywordEmbedding train_keyword_embedding(const std::vector<PackageManifestRecord>& records,
                                         const EmbeddingOptions& options) {
  if (options.dimension < 1) {
    throw Error(ErrorCode::InvalidArgument, "embedding dimension must be >= 1");
  }
  KeywordEmbedding e;
  for (const auto& tc : rank_terms(records, Feature::Keywords)) {
    if (tc.frequency < options.min_count) break;
    if (options.max_vocabulary && e.vocabulary.size() >= options.max_vocabulary) break;
    e.vocabulary.push_back(tc.term);
    e.frequencies.push_back(tc.frequency);
  }
  if (e.vocabulary.size() < 2) {
    throw Error(ErrorCode::VocabularyTooSmall,
                "only " + std::to_string(e.vocabulary.size()) +
                    " keyword(s) reach min_count " + std::to_string(options.min_count));
  }
  for (std::size_t i = 0; i < e.vocabulary.size(); ++i) e.index.emplace(e.vocabulary[i], i);

  Eigen::MatrixXd m = ppmi(cooccurrence_matrix(records, e.vocabulary));
  auto rank = static_cast<Eigen::Index>(std::min(options.dimension, e.vocabulary.size()));
  Eigenpairs pairs = leading_eigenpairs(m, rank);
  e.dimension = static_cast<std::size_t>(rank);
  e.eigenvalues = pairs.values;
  Eigen::VectorXd scale = pairs.values.cwiseMax(0.0).cwiseSqrt();
  e.vectors = pairs.vectors * scale.asDiagonal();
  return e;
}

double keyword_similarity(const KeywordEmbedding& e, std::string_view w1, std::string_view w2) {
  if (w1 == w2) return 1.0;
  auto i = e.find(w1);
  auto j = e.find(w2);
  if (i < 0 || j < 0) return 0.0;
  auto a = e.vectors.row(i);
  auto b = e.vectors.row(j);
  double na = a.norm();
  double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  double cos = a.dot(b) / (na * nb);
  return std::clamp(cos, 0.0, 1.0);
}

std::string export_rankings(const TermRankings& rankings) {
  Table t;
  t.header = {"feature", "rank", "term", "frequency"};
  for (const auto& [feature, ranking] : rankings) {
    for (std::size_t i = 0; i < ranking.terms.size(); ++i) {
      t.rows.push_back({std::string(feature_tag(feature)), std::to_string(i + 1),
                        ranking.terms[i].term, std::to_string(ranking.terms[i].frequency)});
    }
  }
  return t.to_string();
}

TermRankings import_rankings(std::string_view text) {
  Table t = Table::parse(text);
  TermRankings out;
  for (const auto& row : t.rows) {
    Feature f = parse_feature(row.at(0));
    auto& ranking = out[f];
    ranking.feature = f;
    ranking.terms.push_back({row.at(2), std::stoull(row.at(3))});
    ranking.k_cap = ranking.terms.size();
  }
  return out;
}

std::string export_embedding(const KeywordEmbedding& e) {
  Table t;
  t.header = {"term", "frequency"};
  for (std::size_t c = 0; c < e.dimension; ++c) t.header.push_back("v" + std::to_string(c + 1));
  for (std::size_t i = 0; i < e.vocabulary.size(); ++i) {
    std::vector<std::string> row = {e.vocabulary[i], std::to_string(e.frequencies[i])};
    for (std::size_t c = 0; c < e.dimension; ++c) {
      row.push_back(format_double(e.vectors(static_cast<Eigen::Index>(i),
                                            static_cast<Eigen::Index>(c))));
    }
    t.rows.push_back(std::move(row));
  }
  return t.to_string();
}

}  // namespace ecotopo
