#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ecotopo/lens.hpp"
#include "ecotopo/manifest.hpp"
#include "ecotopo/vectorize.hpp"

namespace ecotopo {

struct CoverConfig {
  int resolution = 10;  // intervals per lens axis
  double gain = 0.3;    // overlap fraction of the base spacing
  std::size_t histogram_bins = 10;
  unsigned threads = 1;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return lo <= v && v <= hi; }
};

struct CoverBin {
  std::vector<int> index;  // per-axis interval index
  std::vector<Interval> bounds;
};

struct Cover {
  std::vector<std::vector<Interval>> axes;
  std::vector<CoverBin> bins;  // Cartesian product, lexicographic in index
};

// Per axis with spacing s = range / R, interval i spans
// [min + i*s - g*s/2, min + (i+1)*s + g*s/2]. A zero-range axis gets one
// interval.
Cover build_cover(const LensValues& lens, const CoverConfig& config);

// Row indices whose lens values fall in each bin (inclusive bounds).
std::vector<std::vector<std::size_t>> bin_preimages(const Cover& cover, const LensValues& lens);

// Single-linkage clustering of `points` (rows of `data`) cut at the lower
// edge of the first empty bin, at or above the first occupied one, of a
// histogram of the merge heights and the bin diameter over [0, diameter].
// Uses min(histogram_bins, ceil(log2 m) + 1) bins for m points. Clusters
// are sorted by smallest member; members ascend.
std::vector<std::vector<std::size_t>> cluster_bin(const Eigen::MatrixXd& data,
                                                  std::span<const std::size_t> points,
                                                  const CoverConfig& config);

struct TermStat {
  std::string term;
  std::size_t count = 0;
};

struct NodeColor {
  double mean_f5_scaled = 0.0;
  double mean_f6_scaled = 0.0;
  double mean_f5_raw = 0.0;
  double mean_f6_raw = 0.0;
  TermStat modal_author;
  TermStat modal_domain;
  TermStat modal_license;
  std::vector<std::size_t> tag_counts;  // aligned with MapperGraph::tags
};

struct MapperNode {
  std::size_t id = 0;
  std::vector<int> bin_index;
  std::vector<std::size_t> members;  // ascending row indices
  NodeColor color;
};

struct MapperEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t weight = 0;

  bool operator==(const MapperEdge&) const = default;
};

struct MapperGraph {
  std::vector<std::string> point_names;
  std::vector<MapperNode> nodes;
  std::vector<MapperEdge> edges;  // a < b, sorted
  std::vector<std::string> tags;

  std::vector<std::string> member_names(const MapperNode& node) const;
  // Number of distinct points appearing in any node.
  std::size_t covered_points() const;
};

struct BinClusters {
  std::vector<int> bin_index;
  std::vector<std::vector<std::size_t>> clusters;
};

// One node per cluster, an edge wherever two clusters share members.
// Nodes are ordered by bin index, then by smallest member name.
MapperGraph build_nerve(const std::vector<BinClusters>& bins,
                        std::vector<std::string> point_names);

// Keyword sets strongly associated with GitHub-hosted and npm-centric
// packages; the default colouring tags are their union.
const std::vector<std::string>& github_strong_keywords();
const std::vector<std::string>& npm_strong_keywords();
std::vector<std::string> default_color_tags();

// Fills NodeColor from records (resolved by member name) and the scaled
// f5/f6 columns of `data`. Throws UnknownMember.
void color_nodes(MapperGraph& graph, const DatasetMatrix& data,
                 const std::vector<PackageManifestRecord>& records,
                 const std::vector<std::string>& tags);

// cover -> preimages -> per-bin clustering -> nerve; when `records` is
// given the nodes are colored as well, otherwise only the scaled means.
MapperGraph run_mapper(const DatasetMatrix& data, const LensValues& lens,
                       const CoverConfig& config,
                       const std::vector<PackageManifestRecord>* records = nullptr,
                       const std::vector<std::string>& tags = default_color_tags());

std::size_t connected_components(const MapperGraph& graph);
// E - V + C
long long cycle_rank(const MapperGraph& graph);

}  // namespace ecotopo
