#include "ecotopo/mapper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "ecotopo/error.hpp"
#include "ecotopo/table.hpp"

namespace ecotopo {

Cover build_cover(const LensValues& lens, const CoverConfig& config) {
  if (config.resolution < 1) throw Error(ErrorCode::InvalidArgument, "resolution must be >= 1");
  if (!(config.gain >= 0.0 && config.gain < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "gain must lie in [0, 1)");
  }
  if (!lens.values.allFinite()) throw Error(ErrorCode::InvalidArgument, "lens values not finite");
  Cover cover;
  const Eigen::Index axes = lens.values.cols();
  for (Eigen::Index a = 0; a < axes; ++a) {
    std::vector<Interval> intervals;
    if (lens.values.rows() == 0) {
      intervals.push_back({0.0, 0.0});
    } else {
      const double lo = lens.values.col(a).minCoeff();
      const double hi = lens.values.col(a).maxCoeff();
      const double range = hi - lo;
      if (range <= 0.0) {
        intervals.push_back({lo, hi});
      } else {
        const double s = range / config.resolution;
        const double pad = config.gain * s / 2.0;
        for (int i = 0; i < config.resolution; ++i) {
          intervals.push_back({lo + i * s - pad, lo + (i + 1) * s + pad});
        }
        // Rounding in lo + R*s must not leave the extremes uncovered.
        intervals.front().lo = std::min(intervals.front().lo, lo);
        intervals.back().hi = std::max(intervals.back().hi, hi);
      }
    }
    cover.axes.push_back(std::move(intervals));
  }

  // Cartesian product, last axis fastest.
  std::vector<int> idx(static_cast<std::size_t>(axes), 0);
  if (axes == 0) return cover;
  for (;;) {
    CoverBin bin;
    bin.index = idx;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      bin.bounds.push_back(cover.axes[a][static_cast<std::size_t>(idx[a])]);
    }
    cover.bins.push_back(std::move(bin));
    std::size_t a = idx.size();
    while (a > 0) {
      --a;
      if (++idx[a] < static_cast<int>(cover.axes[a].size())) break;
      idx[a] = 0;
      if (a == 0) return cover;
    }
  }
}

std::vector<std::vector<std::size_t>> bin_preimages(const Cover& cover, const LensValues& lens) {
  std::vector<std::vector<std::size_t>> out(cover.bins.size());
  const Eigen::Index n = lens.values.rows();
  for (std::size_t b = 0; b < cover.bins.size(); ++b) {
    const auto& bounds = cover.bins[b].bounds;
    for (Eigen::Index i = 0; i < n; ++i) {
      bool inside = true;
      for (std::size_t a = 0; a < bounds.size() && inside; ++a) {
        inside = bounds[a].contains(lens.values(i, static_cast<Eigen::Index>(a)));
      }
      if (inside) out[b].push_back(static_cast<std::size_t>(i));
    }
  }
  return out;
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

double row_distance(const Eigen::MatrixXd& data, std::size_t i, std::size_t j) {
  double sq = 0.0;
  const auto ri = static_cast<Eigen::Index>(i);
  const auto rj = static_cast<Eigen::Index>(j);
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    double d = data(ri, c) - data(rj, c);
    sq += d * d;
  }
  return std::sqrt(sq);
}

}  // namespace

std::vector<std::vector<std::size_t>> cluster_bin(const Eigen::MatrixXd& data,
                                                  std::span<const std::size_t> points,
                                                  const CoverConfig& config) {
  std::vector<std::size_t> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end());
  const std::size_t m = pts.size();
  if (m == 0) return {};
  if (m == 1) return {{pts[0]}};

  // Prim's MST: its edge weights are the single-linkage merge heights.
  struct Edge {
    std::size_t u, v;
    double w;
  };
  std::vector<Edge> mst;
  mst.reserve(m - 1);
  std::vector<double> best(m, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> from(m, 0);
  std::vector<char> in_tree(m, 0);
  std::size_t current = 0;
  in_tree[0] = 1;
  for (std::size_t step = 1; step < m; ++step) {
    std::size_t next = m;
    double next_w = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      if (in_tree[j]) continue;
      double d = row_distance(data, pts[current], pts[j]);
      if (d < best[j]) {
        best[j] = d;
        from[j] = current;
      }
      if (next == m || best[j] < next_w) {
        next_w = best[j];
        next = j;
      }
    }
    in_tree[next] = 1;
    mst.push_back({from[next], next, next_w});
    current = next;
  }

  // Histogram of the merge heights plus the bin's diameter over
  // [0, diameter]. The bin count shrinks with Sturges' rule for small bins
  // so that sampling noise alone does not open empty bins.
  double diameter = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      diameter = std::max(diameter, row_distance(data, pts[a], pts[b]));
    }
  }
  double cutoff = std::numeric_limits<double>::infinity();
  if (diameter > 0.0) {
    const auto sturges = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(m)))) + 1;
    const std::size_t bins = std::max<std::size_t>(1, std::min(config.histogram_bins, sturges));
    const double width = diameter / static_cast<double>(bins);
    std::vector<std::size_t> hist(bins, 0);
    auto count = [&](double h) {
      auto b = static_cast<std::size_t>(h / width);
      ++hist[std::min(b, bins - 1)];
    };
    for (const auto& e : mst) count(e.w);
    count(diameter);
    // Bins below the smallest merge height are not a gap between merge
    // levels; the search starts at the first occupied bin.
    std::size_t first = 0;
    while (hist[first] == 0) ++first;
    for (std::size_t b = first; b < bins; ++b) {
      if (hist[b] == 0) {
        cutoff = static_cast<double>(b) * width;
        break;
      }
    }
  }

  UnionFind uf(m);
  for (const auto& e : mst) {
    if (e.w < cutoff) uf.unite(e.u, e.v);
  }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < m; ++i) groups[uf.find(i)].push_back(pts[i]);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(groups.size());
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

std::vector<std::string> MapperGraph::member_names(const MapperNode& node) const {
  std::vector<std::string> out;
  out.reserve(node.members.size());
  for (auto m : node.members) out.push_back(point_names.at(m));
  return out;
}

std::size_t MapperGraph::covered_points() const {
  std::unordered_set<std::size_t> seen;
  for (const auto& n : nodes) seen.insert(n.members.begin(), n.members.end());
  return seen.size();
}

MapperGraph build_nerve(const std::vector<BinClusters>& bins,
                        std::vector<std::string> point_names) {
  MapperGraph g;
  g.point_names = std::move(point_names);
  for (const auto& bin : bins) {
    for (const auto& cluster : bin.clusters) {
      if (cluster.empty()) continue;
      MapperNode node;
      node.bin_index = bin.bin_index;
      node.members = cluster;
      std::sort(node.members.begin(), node.members.end());
      node.members.erase(std::unique(node.members.begin(), node.members.end()),
                         node.members.end());
      g.nodes.push_back(std::move(node));
    }
  }
  auto min_name = [&g](const MapperNode& n) -> const std::string& {
    const std::string* best = &g.point_names.at(n.members.front());
    for (auto m : n.members) {
      if (g.point_names.at(m) < *best) best = &g.point_names.at(m);
    }
    return *best;
  };
  std::stable_sort(g.nodes.begin(), g.nodes.end(), [&](const MapperNode& a, const MapperNode& b) {
    if (a.bin_index != b.bin_index) return a.bin_index < b.bin_index;
    return min_name(a) < min_name(b);
  });
  for (std::size_t i = 0; i < g.nodes.size(); ++i) g.nodes[i].id = i;

  // Invert membership, then count shared points per node pair.
  std::unordered_map<std::size_t, std::vector<std::size_t>> owners;
  for (const auto& node : g.nodes) {
    for (auto m : node.members) owners[m].push_back(node.id);
  }
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> weights;
  for (auto& [point, ids] : owners) {
    for (std::size_t x = 0; x < ids.size(); ++x) {
      for (std::size_t y = x + 1; y < ids.size(); ++y) {
        auto a = std::min(ids[x], ids[y]);
        auto b = std::max(ids[x], ids[y]);
        ++weights[{a, b}];
      }
    }
  }
  for (const auto& [pair, w] : weights) g.edges.push_back({pair.first, pair.second, w});
  return g;
}

const std::vector<std::string>& github_strong_keywords() {
  static const std::vector<std::string> tags = {"gruntplugin", "gulpplugin", "express", "react",
                                                "authenticate"};
  return tags;
}

const std::vector<std::string>& npm_strong_keywords() {
  static const std::vector<std::string> tags = {"util", "array", "buffer", "string", "file"};
  return tags;
}

std::vector<std::string> default_color_tags() {
  std::vector<std::string> tags = github_strong_keywords();
  const auto& npm = npm_strong_keywords();
  tags.insert(tags.end(), npm.begin(), npm.end());
  return tags;
}

namespace {

TermStat modal_term(const std::vector<const std::string*>& terms) {
  std::map<std::string, std::size_t> counts;
  for (const auto* t : terms) ++counts[*t];
  TermStat best;
  for (const auto& [term, count] : counts) {
    if (count > best.count) best = {term, count};  // map order breaks ties
  }
  return best;
}

void color_scaled(MapperGraph& graph, const DatasetMatrix& data) {
  Eigen::Index f5 = -1, f6 = -1;
  for (const auto& s : data.layout.segments) {
    if (s.feature == Feature::Version) f5 = static_cast<Eigen::Index>(s.offset);
    if (s.feature == Feature::Dependencies) f6 = static_cast<Eigen::Index>(s.offset);
  }
  const bool have_raw = data.raw_scalars.size() == data.packages.size();
  for (auto& node : graph.nodes) {
    double s5 = 0, s6 = 0, r5 = 0, r6 = 0;
    for (auto m : node.members) {
      const auto row = static_cast<Eigen::Index>(m);
      if (f5 >= 0) s5 += data.matrix(row, f5);
      if (f6 >= 0) s6 += data.matrix(row, f6);
      if (have_raw) {
        r5 += data.raw_scalars[m].version_scalar;
        r6 += data.raw_scalars[m].dependency_count;
      }
    }
    const double k = static_cast<double>(node.members.size());
    node.color.mean_f5_scaled = s5 / k;
    node.color.mean_f6_scaled = s6 / k;
    if (have_raw) {
      node.color.mean_f5_raw = r5 / k;
      node.color.mean_f6_raw = r6 / k;
    }
  }
}

}  // namespace

void color_nodes(MapperGraph& graph, const DatasetMatrix& data,
                 const std::vector<PackageManifestRecord>& records,
                 const std::vector<std::string>& tags) {
  std::unordered_map<std::string, const PackageManifestRecord*> by_name;
  for (const auto& r : records) by_name.emplace(r.name, &r);
  graph.tags = tags;
  if (data.matrix.rows() == static_cast<Eigen::Index>(graph.point_names.size())) {
    color_scaled(graph, data);
  }
  for (auto& node : graph.nodes) {
    std::vector<const PackageManifestRecord*> members;
    for (auto m : node.members) {
      const auto& name = graph.point_names.at(m);
      auto it = by_name.find(name);
      if (it == by_name.end()) {
        throw Error(ErrorCode::UnknownMember, "node member '" + name + "' has no record");
      }
      members.push_back(it->second);
    }
    double r5 = 0, r6 = 0;
    std::vector<const std::string*> authors, domains, licenses;
    for (const auto* r : members) {
      r5 += r->version_scalar;
      r6 += static_cast<double>(r->dependency_count);
      authors.push_back(&r->author_name);
      domains.push_back(&r->author_domain);
      licenses.push_back(&r->license);
    }
    const double k = static_cast<double>(members.size());
    node.color.mean_f5_raw = r5 / k;
    node.color.mean_f6_raw = r6 / k;
    node.color.modal_author = modal_term(authors);
    node.color.modal_domain = modal_term(domains);
    node.color.modal_license = modal_term(licenses);
    node.color.tag_counts.assign(tags.size(), 0);
    for (std::size_t t = 0; t < tags.size(); ++t) {
      for (const auto* r : members) {
        if (std::find(r->keywords.begin(), r->keywords.end(), tags[t]) != r->keywords.end()) {
          ++node.color.tag_counts[t];
        }
      }
    }
  }
}

MapperGraph run_mapper(const DatasetMatrix& data, const LensValues& lens,
                       const CoverConfig& config,
                       const std::vector<PackageManifestRecord>* records,
                       const std::vector<std::string>& tags) {
  if (lens.values.rows() != data.matrix.rows()) {
    throw Error(ErrorCode::InvalidArgument, "lens rows do not align with dataset rows");
  }
  Cover cover = build_cover(lens, config);
  auto preimages = bin_preimages(cover, lens);
  std::vector<BinClusters> clustered(cover.bins.size());
  parallel_for(cover.bins.size(), config.threads, [&](std::size_t b) {
    clustered[b].bin_index = cover.bins[b].index;
    clustered[b].clusters = cluster_bin(data.matrix, preimages[b], config);
  });
  MapperGraph graph = build_nerve(clustered, data.packages);
  if (graph.nodes.empty()) throw Error(ErrorCode::EmptyGraph, "no point fell in any cover bin");
  if (records) {
    color_nodes(graph, data, *records, tags);
  } else {
    graph.tags = tags;
    color_scaled(graph, data);
    for (auto& node : graph.nodes) node.color.tag_counts.assign(tags.size(), 0);
  }
  return graph;
}

std::size_t connected_components(const MapperGraph& graph) {
  UnionFind uf(graph.nodes.size());
  for (const auto& e : graph.edges) uf.unite(e.a, e.b);
  std::size_t count = 0;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (uf.find(i) == i) ++count;
  }
  return count;
}

long long cycle_rank(const MapperGraph& graph) {
  return static_cast<long long>(graph.edges.size()) -
         static_cast<long long>(graph.nodes.size()) +
         static_cast<long long>(connected_components(graph));
}

}  // namespace ecotopo
