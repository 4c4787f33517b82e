#include "catch2/catch_amalgamated.hpp"

#include <algorithm>

#include "ecotopo/error.hpp"
#include "ecotopo/feature_corpus.hpp"
#include "ecotopo/manifest.hpp"
#include "ecotopo/table.hpp"
#include "ecotopo/vectorize.hpp"
#include "support/fixtures.hpp"

using namespace ecotopo;
using fixtures::make_record;

namespace {

DatasetMatrix assemble(const std::vector<PackageManifestRecord>& corpus, std::size_t k) {
  auto rankings = build_term_rankings(corpus, k);
  auto embedding = train_keyword_embedding(corpus);
  return assemble_dataset(corpus, rankings, embedding);
}

TermRanking license_ranking(std::vector<std::string> terms) {
  TermRanking r;
  r.feature = Feature::License;
  for (auto& t : terms) r.terms.push_back({t, 1});
  r.k_cap = r.terms.size();
  return r;
}

}  // namespace

TEST_CASE("dimension arithmetic for each Top-K granularity") {
  auto wide = fixtures::synthetic_corpus({.packages = 400, .authors = 100, .domains = 100,
                                          .licenses = 100, .keywords = 100});
  for (auto [k, dim] : std::vector<std::pair<std::size_t, std::size_t>>{
           {20, 82}, {50, 202}, {100, 402}}) {
    CHECK(make_layout(build_term_rankings(wide, k)).total_dim == dim);
  }
  auto corpus = fixtures::synthetic_corpus({.packages = 1000, .authors = 1000, .domains = 1000,
                                            .licenses = 5, .keywords = 1000});
  CHECK(make_layout(build_term_rankings(corpus, 1000)).total_dim == 3007);
  auto data = assemble_dataset(wide, build_term_rankings(wide, 20), train_keyword_embedding(wide));
  CHECK(data.layout.total_dim == 82);
  CHECK(data.matrix.cols() == 82);
  CHECK(data.matrix.rows() == 400);
}

TEST_CASE("layout segments are contiguous in f1..f6 order") {
  auto corpus = fixtures::synthetic_corpus({.packages = 50, .authors = 7, .domains = 9,
                                            .licenses = 3, .keywords = 11});
  auto layout = make_layout(build_term_rankings(corpus, 20));
  REQUIRE(layout.segments.size() == 6);
  std::size_t offset = 0;
  const Feature order[] = {Feature::Author,   Feature::AuthorDomain, Feature::License,
                           Feature::Keywords, Feature::Version,      Feature::Dependencies};
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(layout.segments[i].feature == order[i]);
    CHECK(layout.segments[i].offset == offset);
    offset += layout.segments[i].width;
  }
  CHECK(offset == layout.total_dim);
  CHECK(layout.total_dim == 7 + 9 + 3 + 11 + 2);
  CHECK(layout.column_names.size() == layout.total_dim);
  CHECK(layout.column_names[layout.total_dim - 1] == "f6:dependencies");
}

TEST_CASE("license bits follow the ranking") {
  auto ranking = license_ranking({"MIT", "ISC"});
  auto p2 = parse_manifest(fixtures::browserify_manifest());
  auto p1 = p2;
  p1.license = "ISC";
  CHECK(encode_binary_segment(p2, ranking) == Eigen::Vector2d(1, 0));
  CHECK(encode_binary_segment(p1, ranking) == Eigen::Vector2d(0, 1));
  p1.license = "GPL-3.0";
  CHECK(encode_binary_segment(p1, ranking) == Eigen::Vector2d(0, 0));
}

TEST_CASE("binary segments against a membership oracle") {
  auto corpus = fixtures::synthetic_corpus({.packages = 30, .authors = 12, .seed = 3});
  auto rankings = build_term_rankings(corpus, 5);
  for (const auto& r : corpus) {
    for (Feature f : {Feature::Author, Feature::AuthorDomain, Feature::License}) {
      const auto& terms = rankings.at(f).terms;
      auto v = encode_binary_segment(r, rankings.at(f));
      REQUIRE(v.size() == static_cast<Eigen::Index>(terms.size()));
      for (std::size_t j = 0; j < terms.size(); ++j) {
        CHECK(v(static_cast<Eigen::Index>(j)) == (terms[j].term == single_term(r, f) ? 1.0 : 0.0));
      }
      CHECK(v.sum() <= 1.0);
    }
  }
}

TEST_CASE("keyword segment is the max similarity over a package's keywords") {
  std::vector<PackageManifestRecord> recs;
  const std::vector<std::vector<std::string>> lists{
      {"web", "http"}, {"web", "http"}, {"http", "server"}, {"css"}, {"css", "style"},
      {"style"},       {"server", "web"}};
  for (std::size_t i = 0; i < lists.size(); ++i) {
    recs.push_back(make_record("p" + std::to_string(i), "a", "d.net", "MIT", lists[i], "1.0.0", 0));
  }
  auto rankings = build_term_rankings(recs, 3);
  auto e = train_keyword_embedding(recs, {.dimension = 5, .min_count = 1});
  const auto& top = rankings.at(Feature::Keywords);
  for (const auto& r : recs) {
    auto v = encode_keyword_segment(r, top, e);
    for (std::size_t j = 0; j < top.terms.size(); ++j) {
      double best = 0.0;
      for (const auto& w : r.keywords) best = std::max(best, keyword_similarity(e, w, top.terms[j].term));
      CHECK(v(static_cast<Eigen::Index>(j)) == best);
    }
    CHECK(v.minCoeff() >= 0.0);
    CHECK(v.maxCoeff() <= 1.0);
  }
  // exact match scores 1
  auto v0 = encode_keyword_segment(recs[0], top, e);
  for (std::size_t j = 0; j < top.terms.size(); ++j) {
    if (top.terms[j].term == "web") CHECK(v0(static_cast<Eigen::Index>(j)) == 1.0);
  }
  auto stranger = make_record("z", "a", "d.net", "MIT", {"unknown1", "unknown2"}, "1.0.0", 0);
  CHECK(encode_keyword_segment(stranger, top, e).isZero());
}

TEST_CASE("scalar scaling") {
  std::vector<PackageManifestRecord> recs{
      make_record("a", "x", "d.net", "MIT", {"k"}, "1.0.0", 0),
      make_record("b", "x", "d.net", "MIT", {"k"}, "2.0.0", 61),
      make_record("c", "x", "d.net", "MIT", {"k"}, "3.0.0", 112)};
  auto s = encode_scalars(recs);
  CHECK(s[0].second == 0.0);
  CHECK(s[1].second == 61.0 / 112.0);
  CHECK(s[2].second == 1.0);
  CHECK(s[1].first == 0.5);
  for (auto& r : recs) r.dependency_count = 3;
  for (auto [f5, f6] : encode_scalars(recs)) CHECK(f6 == 0.0);
}

TEST_CASE("raw scalars keep the browserify values") {
  auto b = parse_manifest(fixtures::browserify_manifest());
  auto other = make_record("other", "x", "d.net", "ISC", {"browser"}, "1.0.0", 0);
  std::vector<PackageManifestRecord> recs{b, other};
  auto data = assemble_dataset(recs, build_term_rankings(recs, 2),
                               train_keyword_embedding(recs, {.dimension = 2, .min_count = 1}));
  CHECK(data.packages[0] == "browserify");
  CHECK(data.raw_scalars[0].version_scalar == 14.4);
  CHECK(data.raw_scalars[0].dependency_count == 3.0);
}

TEST_CASE("assembled rows agree with the segment encoders and stay in range") {
  auto corpus = fixtures::synthetic_corpus({.packages = 120, .seed = 8});
  auto rankings = build_term_rankings(corpus, 20);
  auto e = train_keyword_embedding(corpus);
  auto data = assemble_dataset(corpus, rankings, e);
  REQUIRE(std::is_sorted(data.packages.begin(), data.packages.end()));
  CHECK(data.matrix.allFinite());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (Feature f : {Feature::Author, Feature::AuthorDomain, Feature::License}) {
      const auto& seg = data.layout.segment(f);
      Eigen::VectorXd got = data.matrix.row(row)
                                .segment(static_cast<Eigen::Index>(seg.offset),
                                         static_cast<Eigen::Index>(seg.width))
                                .transpose();
      CHECK(got == encode_binary_segment(corpus[i], rankings.at(f)));
    }
    const auto& kw = data.layout.segment(Feature::Keywords);
    Eigen::VectorXd got = data.matrix.row(row)
                              .segment(static_cast<Eigen::Index>(kw.offset),
                                       static_cast<Eigen::Index>(kw.width))
                              .transpose();
    CHECK(got == encode_keyword_segment(corpus[i], rankings.at(Feature::Keywords), e));
  }
  CHECK(data.matrix.minCoeff() >= 0.0);
  CHECK(data.matrix.maxCoeff() <= 1.0);
}

TEST_CASE("input order does not matter") {
  auto corpus = fixtures::synthetic_corpus({.packages = 80, .seed = 2});
  auto reversed = corpus;
  std::reverse(reversed.begin(), reversed.end());
  auto a = assemble(corpus, 20);
  auto b = assemble(reversed, 20);
  CHECK(a.packages == b.packages);
  CHECK(a.matrix == b.matrix);
}

TEST_CASE("threads give identical matrices") {
  auto corpus = fixtures::synthetic_corpus({.packages = 200, .seed = 5});
  auto rankings = build_term_rankings(corpus, 20);
  auto e = train_keyword_embedding(corpus);
  auto a = assemble_dataset(corpus, rankings, e, {.scale_scalars = true, .threads = 1});
  auto b = assemble_dataset(corpus, rankings, e, {.scale_scalars = true, .threads = 4});
  CHECK(a.matrix == b.matrix);
}

TEST_CASE("dataset table round-trips bit-exactly") {
  auto data = assemble(fixtures::synthetic_corpus({.packages = 40}), 10);
  auto text = export_dataset(data);
  auto back = import_dataset(text);
  CHECK(back.packages == data.packages);
  CHECK(back.matrix == data.matrix);
  CHECK(back.layout.column_names == data.layout.column_names);
  CHECK(export_dataset(back) == text);
}

TEST_CASE("unscaled scalars when scaling is off") {
  auto corpus = fixtures::synthetic_corpus({.packages = 30});
  auto rankings = build_term_rankings(corpus, 5);
  auto data = assemble_dataset(corpus, rankings, train_keyword_embedding(corpus),
                               {.scale_scalars = false});
  const auto f6 = static_cast<Eigen::Index>(data.layout.segment(Feature::Dependencies).offset);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(data.matrix(static_cast<Eigen::Index>(i), f6) == data.raw_scalars[i].dependency_count);
  }
}

TEST_CASE("empty corpus is rejected") {
  TermRankings r;
  KeywordEmbedding e;
  try {
    assemble_dataset({}, r, e);
    FAIL("expected throw");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::EmptyCorpus);
  }
}
