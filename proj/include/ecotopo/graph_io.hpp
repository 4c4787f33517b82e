#pragma once

#include <string>
#include <string_view>

#include "ecotopo/mapper.hpp"

namespace ecotopo {

// GraphML with color statistics as node attributes and shared-member
// counts as edge weights.
std::string to_graphml(const MapperGraph& graph);

// Graphviz DOT: node width proportional to membership, fill color keyed to
// the node's mean raw f6 in five equal-width buckets.
std::string to_dot(const MapperGraph& graph);

// Structured JSON carrying full member name lists:
// {"tags": [...], "nodes": [{"id", "bin", "members": [names], "color": {...}}],
//  "edges": [{"source", "target", "weight"}]}
std::string to_graph_json(const MapperGraph& graph);
MapperGraph graph_from_json(std::string_view text);

// Tab-separated node and edge listings.
std::string to_node_table(const MapperGraph& graph);
std::string to_edge_table(const MapperGraph& graph);

}  // namespace ecotopo
