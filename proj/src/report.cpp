#include "ecotopo/report.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "ecotopo/error.hpp"
#include "ecotopo/table.hpp"
#include "json.hpp"

namespace ecotopo {

namespace {

void sort_ranked(std::vector<TermCount>& rows) {
  std::sort(rows.begin(), rows.end(), [](const TermCount& a, const TermCount& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.term < b.term;
  });
}

}  // namespace

FrequencyTable top_frequency_table(const std::vector<PackageManifestRecord>& records,
                                   Feature feature, std::size_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "table size must be >= 1");
  FrequencyTable table;
  table.feature = feature;
  switch (feature) {
    case Feature::Version: {
      std::map<std::string, std::uint64_t> buckets;
      for (const auto& r : records) ++buckets[parse_version(r.version_raw).bucket()];
      for (const auto& [bucket, count] : buckets) table.rows.push_back({bucket, count});
      sort_ranked(table.rows);
      break;
    }
    case Feature::Dependencies:
      for (const auto& r : records) table.rows.push_back({r.name, r.dependency_count});
      sort_ranked(table.rows);
      break;
    default:
      table.rows = rank_terms(records, feature);
  }
  if (table.rows.size() > n) table.rows.resize(n);
  return table;
}

std::string format_cell(const TermCount& row) {
  return row.term + " (" + with_thousands(row.frequency) + ")";
}

std::string render_frequency_tables(const std::vector<FrequencyTable>& tables) {
  Table t;
  t.header = {"Frequency Rank"};
  std::size_t depth = 0;
  for (const auto& ft : tables) {
    t.header.push_back(feature_label(ft.feature));
    depth = std::max(depth, ft.rows.size());
  }
  for (std::size_t r = 0; r < depth; ++r) {
    std::vector<std::string> row = {std::to_string(r + 1)};
    for (const auto& ft : tables) row.push_back(r < ft.rows.size() ? format_cell(ft.rows[r]) : "");
    t.rows.push_back(std::move(row));
  }
  return t.to_string();
}

TagLocalityReport tag_locality(const MapperGraph& graph,
                               const std::vector<PackageManifestRecord>& records,
                               const std::vector<std::string>& set_a,
                               const std::vector<std::string>& set_b) {
  if (graph.nodes.empty()) throw Error(ErrorCode::EmptyGraph, "graph has no nodes");
  std::unordered_map<std::string, const PackageManifestRecord*> by_name;
  for (const auto& r : records) by_name.emplace(r.name, &r);
  const std::unordered_set<std::string> a(set_a.begin(), set_a.end());
  const std::unordered_set<std::string> b(set_b.begin(), set_b.end());
  auto matches = [](const PackageManifestRecord& r, const std::unordered_set<std::string>& set) {
    return std::any_of(r.keywords.begin(), r.keywords.end(),
                       [&](const std::string& k) { return set.count(k) > 0; });
  };

  TagLocalityReport rep;
  rep.tag_set_a = set_a;
  rep.tag_set_b = set_b;
  std::vector<int> side(graph.nodes.size(), 0);  // +1 a, -1 b, 0 tie
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const auto& node = graph.nodes[i];
    NodeTagCounts c;
    c.node = node.id;
    c.members = node.members.size();
    for (auto m : node.members) {
      const auto& name = graph.point_names.at(m);
      auto it = by_name.find(name);
      if (it == by_name.end()) {
        throw Error(ErrorCode::UnknownMember, "node member '" + name + "' has no record");
      }
      if (matches(*it->second, a)) ++c.matches_a;
      if (matches(*it->second, b)) ++c.matches_b;
    }
    if (c.matches_a > c.matches_b) {
      side[i] = 1;
      ++rep.a_nodes;
    } else if (c.matches_b > c.matches_a) {
      side[i] = -1;
      ++rep.b_nodes;
    } else {
      ++rep.tied_nodes;
    }
    rep.nodes.push_back(c);
  }

  std::vector<std::vector<std::size_t>> adj(graph.nodes.size());
  for (const auto& e : graph.edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  double total = 0.0;
  std::vector<long> dist(graph.nodes.size());
  for (std::size_t s = 0; s < graph.nodes.size(); ++s) {
    if (side[s] != 1) continue;
    std::fill(dist.begin(), dist.end(), -1);
    std::queue<std::size_t> q;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      auto u = q.front();
      q.pop();
      for (auto v : adj[u]) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
      }
    }
    for (std::size_t t = 0; t < graph.nodes.size(); ++t) {
      if (side[t] != -1) continue;
      if (dist[t] < 0) {
        ++rep.unreachable_pairs;
      } else {
        ++rep.reachable_pairs;
        total += static_cast<double>(dist[t]);
      }
    }
  }
  rep.separation = rep.reachable_pairs ? total / static_cast<double>(rep.reachable_pairs) : 0.0;
  return rep;
}

std::string export_tag_locality(const TagLocalityReport& rep) {
  Table t;
  t.header = {"node", "members", "matches_a", "matches_b", "side"};
  for (const auto& c : rep.nodes) {
    const char* side = c.matches_a > c.matches_b ? "a" : c.matches_b > c.matches_a ? "b" : "tie";
    t.rows.push_back({std::to_string(c.node), std::to_string(c.members),
                      std::to_string(c.matches_a), std::to_string(c.matches_b), side});
  }
  return t.to_string();
}

std::string to_json(const TagLocalityReport& rep) {
  nlohmann::json j = nlohmann::json::object();
  j["tag_set_a"] = rep.tag_set_a;
  j["tag_set_b"] = rep.tag_set_b;
  j["a_nodes"] = rep.a_nodes;
  j["b_nodes"] = rep.b_nodes;
  j["tied_nodes"] = rep.tied_nodes;
  j["reachable_pairs"] = rep.reachable_pairs;
  j["unreachable_pairs"] = rep.unreachable_pairs;
  j["separation"] = rep.separation;
  return j.dump(2) + "\n";
}

}  // namespace ecotopo
