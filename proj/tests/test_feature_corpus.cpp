#include "catch2/catch_amalgamated.hpp"

#include <cmath>
#include <cstring>

#include "ecotopo/error.hpp"
#include "ecotopo/feature_corpus.hpp"
#include "ecotopo/linalg.hpp"
#include "ecotopo/table.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace ecotopo;
using fixtures::make_record;

namespace {

std::vector<PackageManifestRecord> license_corpus(std::size_t mit, std::size_t isc) {
  std::vector<PackageManifestRecord> out;
  for (std::size_t i = 0; i < mit + isc; ++i) {
    out.push_back(make_record("p" + std::to_string(i), "a", "d.net", i < mit ? "MIT" : "ISC",
                              {"k"}, "1.0.0", 0));
  }
  return out;
}

std::vector<PackageManifestRecord> keyword_corpus(
    const std::vector<std::vector<std::string>>& lists) {
  std::vector<PackageManifestRecord> out;
  for (std::size_t i = 0; i < lists.size(); ++i) {
    out.push_back(make_record("p" + std::to_string(i), "a", "d.net", "MIT", lists[i], "1.0.0", 0));
  }
  return out;
}

}  // namespace

TEST_CASE("license ranking follows document frequency") {
  auto rankings = build_term_rankings(license_corpus(6715, 1191), 20);
  const auto& f3 = rankings.at(Feature::License).terms;
  REQUIRE(f3.size() == 2);
  CHECK(f3[0] == TermCount{"MIT", 6715});
  CHECK(f3[1] == TermCount{"ISC", 1191});
}

TEST_CASE("frequency ties break lexicographically") {
  std::vector<PackageManifestRecord> recs{
      make_record("a", "zed", "d.net", "MIT", {"k"}, "1.0.0", 0),
      make_record("b", "amy", "d.net", "MIT", {"k"}, "1.0.0", 0)};
  auto r = build_term_rankings(recs, 5);
  const auto& f1 = r.at(Feature::Author).terms;
  REQUIRE(f1.size() == 2);
  CHECK(f1[0].term == "amy");
  CHECK(f1[1].term == "zed");
}

TEST_CASE("ranking size is min(k, distinct)") {
  auto corpus = fixtures::synthetic_corpus({.packages = 200, .authors = 50, .domains = 80,
                                            .licenses = 5, .keywords = 120});
  auto r = build_term_rankings(corpus, 1000);
  CHECK(r.at(Feature::Author).terms.size() == 50);
  CHECK(r.at(Feature::AuthorDomain).terms.size() == 80);
  CHECK(r.at(Feature::License).terms.size() == 5);
  CHECK(r.at(Feature::Keywords).terms.size() == 120);
  auto r20 = build_term_rankings(corpus, 20);
  for (Feature f : kTermFeatures) {
    const auto& terms = r20.at(f).terms;
    CHECK(terms.size() == std::min<std::size_t>(20, r.at(f).terms.size()));
    for (std::size_t i = 1; i < terms.size(); ++i) {
      CHECK(terms[i - 1].frequency >= terms[i].frequency);
      if (terms[i - 1].frequency == terms[i].frequency) CHECK(terms[i - 1].term < terms[i].term);
    }
    for (const auto& t : terms) CHECK(t.frequency <= corpus.size());
  }
}

TEST_CASE("keyword frequency counts once per package") {
  auto recs = keyword_corpus({{"web", "http"}, {"web"}, {"css"}});
  recs[0].keywords.push_back("web");  // a duplicate slipping past ingest
  auto r = rank_terms(recs, Feature::Keywords);
  CHECK(r[0] == TermCount{"web", 2});
}

TEST_CASE("rankings require records and k >= 1") {
  CHECK_THROWS_AS(build_term_rankings({}, 20), Error);
  CHECK_THROWS_AS(build_term_rankings(license_corpus(1, 0), 0), Error);
}

TEST_CASE("rankings round-trip through the table format") {
  auto corpus = fixtures::synthetic_corpus({});
  auto r = build_term_rankings(corpus, 10);
  auto back = import_rankings(export_rankings(r));
  for (Feature f : kTermFeatures) CHECK(back.at(f).terms == r.at(f).terms);
}

TEST_CASE("three-word embedding against a dense oracle") {
  // web and http always together; css never with either.
  auto recs = keyword_corpus({{"web", "http"}, {"web", "http"}, {"http", "web"}, {"css"}, {"css"}});
  EmbeddingOptions opt;
  opt.dimension = 3;
  auto e = train_keyword_embedding(recs, opt);
  REQUIRE(e.vocabulary.size() == 3);

  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(3, 3);
  auto idx = [&](const char* w) { return static_cast<Eigen::Index>(e.find(w)); };
  counts(idx("web"), idx("http")) = 3;
  counts(idx("http"), idx("web")) = 3;
  CHECK((cooccurrence_matrix(recs, e.vocabulary) - counts).cwiseAbs().maxCoeff() == 0.0);

  auto eig = oracles::jacobi_eigen(oracles::ppmi(counts));
  Eigen::MatrixXd expected = eig.vectors * eig.values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  CHECK((e.vectors - expected).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((e.eigenvalues - eig.values).cwiseAbs().maxCoeff() < 1e-8);

  CHECK(keyword_similarity(e, "web", "http") > keyword_similarity(e, "web", "css"));
  CHECK(keyword_similarity(e, "web", "http") == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(keyword_similarity(e, "web", "css") == 0.0);
}

TEST_CASE("full-rank embedding reproduces the positive part of PPMI") {
  auto corpus = fixtures::synthetic_corpus({.packages = 60, .keywords = 12,
                                            .keywords_per_package = 4, .seed = 9});
  EmbeddingOptions opt;
  opt.dimension = 50;
  opt.min_count = 1;
  auto e = train_keyword_embedding(corpus, opt);
  const auto v = static_cast<Eigen::Index>(e.vocabulary.size());
  REQUIRE(v == 12);
  CHECK(e.dimension == 12);

  // Co-occurrence counts by brute force over the records.
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(v, v);
  for (const auto& r : corpus) {
    for (const auto& a : r.keywords)
      for (const auto& b : r.keywords)
        if (a != b) counts(e.find(a), e.find(b)) += 1.0;
  }
  CHECK((cooccurrence_matrix(corpus, e.vocabulary) - counts).cwiseAbs().maxCoeff() == 0.0);
  Eigen::MatrixXd pp = oracles::ppmi(counts);
  CHECK((ppmi(counts) - pp).cwiseAbs().maxCoeff() < 1e-12);
  auto eig = oracles::jacobi_eigen(pp);
  Eigen::MatrixXd positive =
      eig.vectors * eig.values.cwiseMax(0.0).asDiagonal() * eig.vectors.transpose();
  CHECK((e.vectors * e.vectors.transpose() - positive).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((e.eigenvalues - eig.values).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("leading eigenpairs match the Jacobi oracle with signs fixed") {
  Rng rng(11);
  Eigen::MatrixXd A(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) A(i, j) = rng.gaussian();
  Eigen::MatrixXd S = A + A.transpose();
  auto ours = leading_eigenpairs(S, 3);
  auto ref = oracles::jacobi_eigen(S);
  for (int c = 0; c < 3; ++c) {
    CHECK(std::abs(ours.values(c) - ref.values(c)) < 1e-10);
    CHECK((ours.vectors.col(c) - ref.vectors.col(c)).norm() < 1e-8);
  }
}

TEST_CASE("embedding is bitwise reproducible") {
  auto corpus = fixtures::synthetic_corpus({.packages = 300, .keywords = 80, .seed = 4});
  auto a = train_keyword_embedding(corpus);
  auto b = train_keyword_embedding(corpus);
  REQUIRE(a.vectors.size() == b.vectors.size());
  CHECK(std::memcmp(a.vectors.data(), b.vectors.data(),
                    sizeof(double) * static_cast<std::size_t>(a.vectors.size())) == 0);
  CHECK(export_embedding(a) == export_embedding(b));
  CHECK(a.vectors.allFinite());
}

TEST_CASE("similarity rules") {
  auto e = train_keyword_embedding(keyword_corpus({{"a", "b"}}), {.dimension = 2, .min_count = 1});
  CHECK(keyword_similarity(e, "a", "a") == 1.0);
  CHECK(keyword_similarity(e, "unseen", "unseen") == 1.0);
  CHECK(keyword_similarity(e, "a", "unseen") == 0.0);
  const double ab = keyword_similarity(e, "a", "b");
  CHECK(ab >= 0.0);
  CHECK(ab <= 1.0);
  CHECK(ab == keyword_similarity(e, "b", "a"));
}

TEST_CASE("min_count and vocabulary cap") {
  auto recs = keyword_corpus({{"a", "b", "rare"}, {"a", "b"}, {"a", "c"}, {"c", "b"}});
  auto e = train_keyword_embedding(recs, {.dimension = 5, .min_count = 2});
  CHECK(e.find("rare") == -1);
  CHECK(e.vocabulary.size() == 3);
  auto capped = train_keyword_embedding(recs, {.dimension = 5, .min_count = 1, .max_vocabulary = 2});
  CHECK(capped.vocabulary.size() == 2);
  try {
    train_keyword_embedding(recs, {.dimension = 5, .min_count = 10});
    FAIL("expected throw");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::VocabularyTooSmall);
  }
}

TEST_CASE("orthogonal vectors clamp to zero") {
  KeywordEmbedding e;
  e.vocabulary = {"x", "y", "z"};
  e.vectors = Eigen::MatrixXd(3, 2);
  e.vectors << 1, 0, 0, 1, -1, 0;
  e.dimension = 2;
  for (std::size_t i = 0; i < 3; ++i) e.index.emplace(e.vocabulary[i], i);
  CHECK(keyword_similarity(e, "x", "y") == 0.0);
  CHECK(keyword_similarity(e, "x", "z") == 0.0);
}
