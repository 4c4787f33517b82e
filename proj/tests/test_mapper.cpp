#include "catch2/catch_amalgamated.hpp"

#include <algorithm>
#include <set>

#include "ecotopo/error.hpp"
#include "ecotopo/graph_io.hpp"
#include "ecotopo/lens.hpp"
#include "ecotopo/mapper.hpp"
#include "ecotopo/table.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace ecotopo;

namespace {

LensValues lens_of(const Eigen::MatrixXd& values) {
  LensValues l;
  l.values = values;
  return l;
}

Eigen::MatrixXd uniform_matrix(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd X(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) X(i, j) = rng.uniform();
  return X;
}

std::vector<std::size_t> iota_points(std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  return p;
}

std::size_t multiplicity(const MapperGraph& g) {
  std::size_t s = 0;
  for (const auto& n : g.nodes) s += n.members.size();
  return s;
}

}  // namespace

TEST_CASE("cover intervals follow the spacing formula") {
  Eigen::MatrixXd v(2, 1);
  v << 0.0, 1.0;
  CoverConfig cfg;
  cfg.resolution = 2;
  cfg.gain = 0.5;
  auto cover = build_cover(lens_of(v), cfg);
  REQUIRE(cover.axes[0].size() == 2);
  CHECK(cover.axes[0][0].lo == -0.125);
  CHECK(cover.axes[0][0].hi == 0.625);
  CHECK(cover.axes[0][1].lo == 0.375);
  CHECK(cover.axes[0][1].hi == 1.125);
  CHECK(cover.axes[0][0].hi - cover.axes[0][1].lo == 0.25);

  cfg.resolution = 1;
  auto single = build_cover(lens_of(v), cfg);
  CHECK(single.bins.size() == 1);
}

TEST_CASE("adjacent overlap is g*s and every point is covered") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    Eigen::MatrixXd values = uniform_matrix(200, 2, seed) * 7.0;
    CoverConfig cfg;
    cfg.resolution = 1 + static_cast<int>(rng.below(9));
    cfg.gain = 0.9 * rng.uniform();
    auto cover = build_cover(lens_of(values), cfg);
    CHECK(cover.bins.size() ==
          static_cast<std::size_t>(cfg.resolution) * static_cast<std::size_t>(cfg.resolution));
    for (int a = 0; a < 2; ++a) {
      const double range = values.col(a).maxCoeff() - values.col(a).minCoeff();
      const double s = range / cfg.resolution;
      const auto& iv = cover.axes[static_cast<std::size_t>(a)];
      for (std::size_t i = 1; i + 1 < iv.size(); ++i) {
        CHECK(iv[i - 1].hi - iv[i].lo == Catch::Approx(cfg.gain * s).margin(1e-12));
      }
    }
    auto pre = bin_preimages(cover, lens_of(values));
    std::vector<int> hits(200, 0);
    for (std::size_t b = 0; b < pre.size(); ++b) {
      for (auto p : pre[b]) {
        hits[p]++;
        for (int a = 0; a < 2; ++a) {
          CHECK(cover.bins[b].bounds[static_cast<std::size_t>(a)].contains(
              values(static_cast<Eigen::Index>(p), a)));
        }
      }
    }
    for (int h : hits) CHECK(h >= 1);
  }
}

TEST_CASE("zero-range axis gives a single interval") {
  Eigen::MatrixXd v = Eigen::MatrixXd::Constant(5, 1, 3.0);
  auto cover = build_cover(lens_of(v), {});
  CHECK(cover.bins.size() == 1);
  CHECK(bin_preimages(cover, lens_of(v))[0].size() == 5);
}

TEST_CASE("cluster_bin small cases") {
  CoverConfig cfg;
  Eigen::MatrixXd same = Eigen::MatrixXd::Ones(6, 3);
  auto p6 = iota_points(6);
  CHECK(cluster_bin(same, p6, cfg).size() == 1);
  CHECK(cluster_bin(same, std::vector<std::size_t>{}, cfg).empty());
  CHECK(cluster_bin(same, std::vector<std::size_t>{4}, cfg) ==
        std::vector<std::vector<std::size_t>>{{4}});

  Eigen::MatrixXd pairs(4, 2);
  pairs << 0, 0, 0.01, 0, 1, 0, 1.01, 0;
  auto c = cluster_bin(pairs, iota_points(4), cfg);
  CHECK(c == std::vector<std::vector<std::size_t>>{{0, 1}, {2, 3}});
}

TEST_CASE("cluster_bin matches the brute-force dendrogram cut") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Rng rng(seed);
    Eigen::MatrixXd centers = uniform_matrix(3, 3, seed * 31) * 10.0;
    auto blobs = fixtures::gaussian_blobs(centers, 8, 0.3 + rng.uniform(), seed);
    std::vector<std::size_t> pts;
    for (std::size_t i = 0; i < 24; ++i)
      if (rng.uniform() < 0.8) pts.push_back(i);
    CoverConfig cfg;
    cfg.histogram_bins = 5 + rng.below(10);
    auto ours = cluster_bin(blobs.X, pts, cfg);
    auto ref = oracles::single_linkage_clusters(blobs.X, pts, cfg.histogram_bins);
    CHECK(ours == ref);
  }
}

TEST_CASE("nerve edges equal the quadratic intersection oracle") {
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    Rng rng(trial + 100);
    const auto n = static_cast<Eigen::Index>(50 + rng.below(451));
    auto X = uniform_matrix(n, 3, trial);
    CoverConfig cfg;
    cfg.resolution = 2 + static_cast<int>(rng.below(5));
    cfg.gain = 0.1 + 0.5 * rng.uniform();
    auto data = fixtures::bare_dataset(X);
    auto graph = run_mapper(data, lens_of(X.leftCols(2)), cfg);
    std::vector<std::vector<std::size_t>> members;
    for (const auto& node : graph.nodes) members.push_back(node.members);
    auto ref = oracles::nerve_edges(members);
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> ours;
    for (const auto& e : graph.edges) {
      CHECK(e.a < e.b);
      ours[{e.a, e.b}] = e.weight;
    }
    CHECK(ours == ref);
    CHECK(graph.covered_points() == static_cast<std::size_t>(n));
  }
}

TEST_CASE("nerve by hand") {
  std::vector<BinClusters> bins(2);
  bins[0].bin_index = {0};
  bins[0].clusters = {{0, 1, 2}};
  bins[1].bin_index = {1};
  bins[1].clusters = {{2, 3}};
  auto g = build_nerve(bins, {"a", "b", "c", "d"});
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0] == MapperEdge{0, 1, 1});

  bins[1].clusters = {{3}};
  CHECK(build_nerve(bins, {"a", "b", "c", "d"}).edges.empty());
}

TEST_CASE("noisy circle gives a loop") {
  auto X = fixtures::noisy_circle(500, 0.05, 7);
  auto data = fixtures::bare_dataset(X);
  CoverConfig cfg;
  cfg.resolution = 8;
  cfg.gain = 0.3;
  auto graph = run_mapper(data, fit_pca(X, 2), cfg);
  CHECK(connected_components(graph) == 1);
  CHECK(cycle_rank(graph) >= 1);
}

TEST_CASE("two separated blobs give two components") {
  Eigen::MatrixXd centers(2, 4);
  centers.setZero();
  centers(1, 0) = 10.0;
  auto blobs = fixtures::gaussian_blobs(centers, 100, 1.0, 5);
  auto data = fixtures::bare_dataset(blobs.X);
  for (int r : {2, 4, 8}) {
    CoverConfig cfg;
    cfg.resolution = r;
    auto graph = run_mapper(data, fit_pca(blobs.X, 1), cfg);
    CHECK(connected_components(graph) == 2);
  }
}

TEST_CASE("single bin reduces to clustering the whole dataset") {
  auto X = uniform_matrix(60, 3, 4);
  auto data = fixtures::bare_dataset(X);
  CoverConfig cfg;
  cfg.resolution = 1;
  cfg.gain = 0.0;
  auto graph = run_mapper(data, fit_pca(X, 1), cfg);
  auto direct = cluster_bin(X, iota_points(60), cfg);
  REQUIRE(graph.nodes.size() == direct.size());
  for (std::size_t i = 0; i < direct.size(); ++i) CHECK(graph.nodes[i].members == direct[i]);
}

TEST_CASE("more gain never lowers total membership") {
  auto X = uniform_matrix(300, 3, 6);
  auto data = fixtures::bare_dataset(X);
  auto lens = fit_pca(X, 2);
  std::size_t prev = 0;
  for (double g : {0.0, 0.1, 0.2, 0.3, 0.45, 0.6}) {
    CoverConfig cfg;
    cfg.resolution = 5;
    cfg.gain = g;
    auto total = multiplicity(run_mapper(data, lens, cfg));
    CHECK(total >= prev);
    prev = total;
  }
}

TEST_CASE("graph is deterministic across thread counts") {
  auto X = uniform_matrix(400, 4, 8);
  auto data = fixtures::bare_dataset(X);
  auto lens = fit_pca(X, 2);
  CoverConfig a;
  CoverConfig b;
  b.threads = 4;
  CHECK(to_graph_json(run_mapper(data, lens, a)) == to_graph_json(run_mapper(data, lens, b)));
}

TEST_CASE("node colouring") {
  std::vector<PackageManifestRecord> recs{
      fixtures::make_record("a", "x", "d.net", "MIT", {"util"}, "1.0.0", 1),
      fixtures::make_record("b", "y", "d.net", "MIT", {"express", "util"}, "2.0.0", 2),
      fixtures::make_record("c", "y", "e.net", "MIT", {"react"}, "3.0.0", 3)};
  Eigen::MatrixXd X(3, 2);
  X << 0, 0, 0.1, 0, 0.2, 0;
  auto data = fixtures::bare_dataset(X);
  data.packages = {"a", "b", "c"};
  CoverConfig cfg;
  cfg.resolution = 1;
  auto graph = run_mapper(data, fit_pca(X, 1), cfg, &recs, {"util", "express"});
  REQUIRE(graph.nodes.size() == 1);
  const auto& c = graph.nodes[0].color;
  CHECK(c.mean_f6_raw == 2.0);
  CHECK(c.mean_f5_raw == 2.0);
  CHECK(c.modal_license.term == "MIT");
  CHECK(c.modal_license.count == 3);
  CHECK(c.modal_author.term == "y");
  CHECK(c.modal_domain.term == "d.net");
  CHECK(c.tag_counts == std::vector<std::size_t>{2, 1});

  recs.pop_back();
  try {
    run_mapper(data, fit_pca(X, 1), cfg, &recs);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownMember);
  }
}

TEST_CASE("graph exports") {
  auto X = fixtures::noisy_circle(120, 0.05, 3);
  auto data = fixtures::bare_dataset(X);
  CoverConfig cfg;
  cfg.resolution = 6;
  auto graph = run_mapper(data, fit_pca(X, 2), cfg);

  auto back = graph_from_json(to_graph_json(graph));
  CHECK(to_graph_json(back) == to_graph_json(graph));
  CHECK(back.edges == graph.edges);

  auto graphml = to_graphml(graph);
  CHECK(graphml.find("<graphml") != std::string::npos);
  CHECK(graphml.find("mean_f6") != std::string::npos);
  auto dot = to_dot(graph);
  CHECK(dot.rfind("graph", 0) == 0);
  CHECK(std::count(dot.begin(), dot.end(), '\n') >= static_cast<long>(graph.nodes.size()));

  Table nodes = Table::parse(to_node_table(graph));
  Table edges = Table::parse(to_edge_table(graph));
  CHECK(nodes.rows.size() == graph.nodes.size());
  CHECK(edges.rows.size() == graph.edges.size());
}
