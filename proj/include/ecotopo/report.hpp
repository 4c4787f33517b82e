#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecotopo/feature_corpus.hpp"
#include "ecotopo/manifest.hpp"
#include "ecotopo/mapper.hpp"

namespace ecotopo {

struct FrequencyTable {
  Feature feature = Feature::Author;
  std::vector<TermCount> rows;
};

// Top-n by package frequency, ties lexicographic. f5 counts "major.minor"
// buckets; f6 ranks packages by their dependency count.
FrequencyTable top_frequency_table(const std::vector<PackageManifestRecord>& records,
                                   Feature feature, std::size_t n);

// "MIT (6,715)"
std::string format_cell(const TermCount& row);

// One column per table, one row per rank:
// "Frequency Rank  Author (f1)  ...", cells as format_cell().
std::string render_frequency_tables(const std::vector<FrequencyTable>& tables);

struct NodeTagCounts {
  std::size_t node = 0;
  std::size_t members = 0;
  std::size_t matches_a = 0;
  std::size_t matches_b = 0;
};

struct TagLocalityReport {
  std::vector<std::string> tag_set_a;
  std::vector<std::string> tag_set_b;
  std::vector<NodeTagCounts> nodes;
  std::size_t a_nodes = 0;
  std::size_t b_nodes = 0;
  std::size_t tied_nodes = 0;
  std::size_t reachable_pairs = 0;
  std::size_t unreachable_pairs = 0;
  // Mean hop distance between a-dominated and b-dominated nodes over
  // reachable pairs; 0 when there are none.
  double separation = 0.0;
};

// A member matches a set when any of its keywords is in it. Throws
// EmptyGraph and UnknownMember.
TagLocalityReport tag_locality(const MapperGraph& graph,
                               const std::vector<PackageManifestRecord>& records,
                               const std::vector<std::string>& set_a,
                               const std::vector<std::string>& set_b);

// node, members, matches_a, matches_b, side
std::string export_tag_locality(const TagLocalityReport& report);
// Summary counts and separation.
std::string to_json(const TagLocalityReport& report);

}  // namespace ecotopo
