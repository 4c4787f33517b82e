#include "ecotopo/vectorize.hpp"

#include <algorithm>
#include <unordered_map>

#include "ecotopo/error.hpp"
#include "ecotopo/table.hpp"

namespace ecotopo {

const Segment& VectorLayout::segment(Feature f) const {
  for (const auto& s : segments) {
    if (s.feature == f) return s;
  }
  throw Error(ErrorCode::InvalidArgument,
              "layout has no segment " + std::string(feature_tag(f)));
}

VectorLayout make_layout(const TermRankings& rankings) {
  VectorLayout layout;
  std::size_t offset = 0;
  for (Feature f : kTermFeatures) {
    auto it = rankings.find(f);
    if (it == rankings.end()) {
      throw Error(ErrorCode::InvalidArgument,
                  "missing ranking for " + std::string(feature_tag(f)));
    }
    const auto& terms = it->second.terms;
    layout.segments.push_back({f, offset, terms.size()});
    for (const auto& t : terms) {
      layout.column_names.push_back(std::string(feature_tag(f)) + ":" + t.term);
    }
    offset += terms.size();
  }
  layout.segments.push_back({Feature::Version, offset++, 1});
  layout.column_names.push_back("f5:version");
  layout.segments.push_back({Feature::Dependencies, offset++, 1});
  layout.column_names.push_back("f6:dependencies");
  layout.total_dim = offset;
  return layout;
}

Eigen::VectorXd encode_binary_segment(const PackageManifestRecord& record,
                                      const TermRanking& ranking) {
  const std::string& term = single_term(record, ranking.feature);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ranking.terms.size()));
  for (std::size_t j = 0; j < ranking.terms.size(); ++j) {
    if (ranking.terms[j].term == term) {
      out(static_cast<Eigen::Index>(j)) = 1.0;
      break;
    }
  }
  return out;
}

Eigen::VectorXd encode_keyword_segment(const PackageManifestRecord& record,
                                       const TermRanking& ranking,
                                       const KeywordEmbedding& embedding) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ranking.terms.size()));
  for (std::size_t j = 0; j < ranking.terms.size(); ++j) {
    double best = 0.0;
    for (const auto& w : record.keywords) {
      best = std::max(best, keyword_similarity(embedding, w, ranking.terms[j].term));
    }
    out(static_cast<Eigen::Index>(j)) = best;
  }
  return out;
}

namespace {

std::vector<double> min_max(const std::vector<double>& xs) {
  auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  double range = *hi - *lo;
  std::vector<double> out(xs.size(), 0.0);
  if (range > 0.0) {
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = (xs[i] - *lo) / range;
  }
  return out;
}

// Precomputed similarity between every ranked keyword and every vocabulary
// word; agrees exactly with keyword_similarity().
class KeywordScorer {
 public:
  KeywordScorer(const TermRanking& ranking, const KeywordEmbedding& e)
      : embedding_(e) {
    const auto terms = static_cast<Eigen::Index>(ranking.terms.size());
    const auto vocab = static_cast<Eigen::Index>(e.vocabulary.size());
    sims_ = Eigen::MatrixXd::Zero(terms, vocab);
    for (Eigen::Index j = 0; j < terms; ++j) {
      const auto& term = ranking.terms[static_cast<std::size_t>(j)].term;
      if (e.find(term) < 0) continue;
      for (Eigen::Index v = 0; v < vocab; ++v) {
        sims_(j, v) = keyword_similarity(e, e.vocabulary[static_cast<std::size_t>(v)], term);
      }
    }
    for (Eigen::Index j = 0; j < terms; ++j) {
      term_pos_.emplace(ranking.terms[static_cast<std::size_t>(j)].term, j);
    }
  }

  void encode(const PackageManifestRecord& record, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out) const {
    out.setZero();
    for (const auto& w : record.keywords) {
      auto v = embedding_.find(w);
      if (v >= 0) {
        for (Eigen::Index j = 0; j < out.size(); ++j) out(j) = std::max(out(j), sims_(j, v));
      }
      auto exact = term_pos_.find(w);
      if (exact != term_pos_.end()) out(exact->second) = 1.0;
    }
  }

 private:
  const KeywordEmbedding& embedding_;
  Eigen::MatrixXd sims_;
  std::unordered_map<std::string, Eigen::Index> term_pos_;
};

}  // namespace

std::vector<std::pair<double, double>> encode_scalars(
    const std::vector<PackageManifestRecord>& records) {
  std::vector<double> versions, deps;
  versions.reserve(records.size());
  deps.reserve(records.size());
  for (const auto& r : records) {
    versions.push_back(r.version_scalar);
    deps.push_back(static_cast<double>(r.dependency_count));
  }
  std::vector<std::pair<double, double>> out(records.size());
  if (records.empty()) return out;
  auto v = min_max(versions);
  auto d = min_max(deps);
  for (std::size_t i = 0; i < records.size(); ++i) out[i] = {v[i], d[i]};
  return out;
}

DatasetMatrix assemble_dataset(std::vector<PackageManifestRecord> records,
                               const TermRankings& rankings,
                               const KeywordEmbedding& embedding,
                               const VectorizeOptions& options) {
  if (records.empty()) throw Error(ErrorCode::EmptyCorpus, "no records to vectorize");
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });

  DatasetMatrix data;
  data.layout = make_layout(rankings);
  const auto n = static_cast<Eigen::Index>(records.size());
  data.matrix = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(data.layout.total_dim));
  data.packages.reserve(records.size());
  data.raw_scalars.reserve(records.size());
  for (const auto& r : records) {
    data.packages.push_back(r.name);
    data.raw_scalars.push_back({r.version_scalar, static_cast<double>(r.dependency_count)});
  }

  const auto& keyword_ranking = rankings.at(Feature::Keywords);
  KeywordScorer scorer(keyword_ranking, embedding);
  const auto& kw = data.layout.segment(Feature::Keywords);

  parallel_for(records.size(), options.threads, [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (Feature f : {Feature::Author, Feature::AuthorDomain, Feature::License}) {
      const auto& seg = data.layout.segment(f);
      const std::string& term = single_term(records[i], f);
      const auto& terms = rankings.at(f).terms;
      for (std::size_t j = 0; j < terms.size(); ++j) {
        if (terms[j].term == term) {
          data.matrix(row, static_cast<Eigen::Index>(seg.offset + j)) = 1.0;
          break;
        }
      }
    }
    scorer.encode(records[i], data.matrix.row(row).segment(static_cast<Eigen::Index>(kw.offset),
                                                           static_cast<Eigen::Index>(kw.width)));
  });

  const auto f5 = static_cast<Eigen::Index>(data.layout.segment(Feature::Version).offset);
  const auto f6 = static_cast<Eigen::Index>(data.layout.segment(Feature::Dependencies).offset);
  if (options.scale_scalars) {
    auto scaled = encode_scalars(records);
    for (Eigen::Index i = 0; i < n; ++i) {
      data.matrix(i, f5) = scaled[static_cast<std::size_t>(i)].first;
      data.matrix(i, f6) = scaled[static_cast<std::size_t>(i)].second;
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      data.matrix(i, f5) = data.raw_scalars[static_cast<std::size_t>(i)].version_scalar;
      data.matrix(i, f6) = data.raw_scalars[static_cast<std::size_t>(i)].dependency_count;
    }
  }
  return data;
}

std::string export_dataset(const DatasetMatrix& data) {
  std::string out;
  out.reserve(data.packages.size() * (data.layout.total_dim * 4 + 16));
  out += "package";
  for (const auto& c : data.layout.column_names) {
    out += '\t';
    out += escape_cell(c);
  }
  out += '\n';
  for (std::size_t i = 0; i < data.packages.size(); ++i) {
    out += escape_cell(data.packages[i]);
    for (Eigen::Index j = 0; j < data.matrix.cols(); ++j) {
      out += '\t';
      out += format_double(data.matrix(static_cast<Eigen::Index>(i), j));
    }
    out += '\n';
  }
  return out;
}

DatasetMatrix import_dataset(std::string_view text) {
  Table t = Table::parse(text);
  if (t.header.empty() || t.header[0] != "package") {
    throw Error(ErrorCode::MalformedDocument, "dataset table must start with a 'package' column");
  }
  DatasetMatrix data;
  std::size_t offset = 0;
  for (std::size_t c = 1; c < t.header.size(); ++c) {
    const auto& name = t.header[c];
    auto colon = name.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::MalformedDocument, "column '" + name + "' lacks a feature prefix");
    }
    Feature f = parse_feature(name.substr(0, colon));
    if (data.layout.segments.empty() || data.layout.segments.back().feature != f) {
      data.layout.segments.push_back({f, offset, 0});
    }
    ++data.layout.segments.back().width;
    data.layout.column_names.push_back(name);
    ++offset;
  }
  data.layout.total_dim = offset;
  data.matrix.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(offset));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    data.packages.push_back(t.rows[i][0]);
    for (std::size_t c = 1; c < t.rows[i].size(); ++c) {
      data.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c - 1)) =
          parse_double(t.rows[i][c]);
    }
  }
  return data;
}

}  // namespace ecotopo
