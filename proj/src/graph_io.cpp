#include "ecotopo/graph_io.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "ecotopo/error.hpp"
#include "ecotopo/table.hpp"
#include "json.hpp"

namespace ecotopo {

using nlohmann::json;

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

std::string bin_label(const std::vector<int>& index) {
  std::string out;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(index[i]);
  }
  return out;
}

struct Attr {
  std::string key;
  std::string type;  // GraphML attr.type
  std::string value;
};

std::vector<Attr> node_attributes(const MapperGraph& g, const MapperNode& n) {
  const auto& c = n.color;
  std::vector<Attr> attrs = {
      {"size", "int", std::to_string(n.members.size())},
      {"bin", "string", bin_label(n.bin_index)},
      {"mean_f5", "double", format_double(c.mean_f5_raw)},
      {"mean_f6", "double", format_double(c.mean_f6_raw)},
      {"mean_f5_scaled", "double", format_double(c.mean_f5_scaled)},
      {"mean_f6_scaled", "double", format_double(c.mean_f6_scaled)},
      {"modal_author", "string", c.modal_author.term},
      {"modal_author_count", "int", std::to_string(c.modal_author.count)},
      {"modal_domain", "string", c.modal_domain.term},
      {"modal_domain_count", "int", std::to_string(c.modal_domain.count)},
      {"modal_license", "string", c.modal_license.term},
      {"modal_license_count", "int", std::to_string(c.modal_license.count)},
  };
  for (std::size_t t = 0; t < g.tags.size(); ++t) {
    std::size_t count = t < c.tag_counts.size() ? c.tag_counts[t] : 0;
    attrs.push_back({"tag_" + g.tags[t], "int", std::to_string(count)});
  }
  return attrs;
}

}  // namespace

std::string to_graphml(const MapperGraph& g) {
  std::string out =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n";
  MapperNode probe;
  probe.color.tag_counts.assign(g.tags.size(), 0);
  const auto keys = node_attributes(g, probe);
  for (std::size_t k = 0; k < keys.size(); ++k) {
    out += "  <key id=\"d" + std::to_string(k) + "\" for=\"node\" attr.name=\"" +
           xml_escape(keys[k].key) + "\" attr.type=\"" + keys[k].type + "\"/>\n";
  }
  out += "  <key id=\"w\" for=\"edge\" attr.name=\"weight\" attr.type=\"int\"/>\n";
  out += "  <graph id=\"mapper\" edgedefault=\"undirected\">\n";
  for (const auto& n : g.nodes) {
    out += "    <node id=\"n" + std::to_string(n.id) + "\">\n";
    auto attrs = node_attributes(g, n);
    for (std::size_t k = 0; k < attrs.size(); ++k) {
      out += "      <data key=\"d" + std::to_string(k) + "\">" + xml_escape(attrs[k].value) +
             "</data>\n";
    }
    out += "    </node>\n";
  }
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = g.edges[i];
    out += "    <edge id=\"e" + std::to_string(i) + "\" source=\"n" + std::to_string(e.a) +
           "\" target=\"n" + std::to_string(e.b) + "\">\n";
    out += "      <data key=\"w\">" + std::to_string(e.weight) + "</data>\n";
    out += "    </edge>\n";
  }
  out += "  </graph>\n</graphml>\n";
  return out;
}

std::string to_dot(const MapperGraph& g) {
  static const char* kPalette[] = {"#2c7bb6", "#abd9e9", "#ffffbf", "#fdae61", "#d7191c"};
  std::size_t max_size = 1;
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    max_size = std::max(max_size, n.members.size());
    double f6 = n.color.mean_f6_raw;
    if (i == 0 || f6 < lo) lo = f6;
    if (i == 0 || f6 > hi) hi = f6;
  }
  std::string out = "graph mapper {\n  node [shape=circle, style=filled, fixedsize=true];\n";
  for (const auto& n : g.nodes) {
    double width = 1.5 * static_cast<double>(n.members.size()) / static_cast<double>(max_size);
    std::size_t bucket = 0;
    if (hi > lo) {
      bucket = static_cast<std::size_t>((n.color.mean_f6_raw - lo) / (hi - lo) * 5.0);
      bucket = std::min<std::size_t>(bucket, 4);
    }
    out += "  n" + std::to_string(n.id) + " [label=\"" + std::to_string(n.members.size()) +
           "\", width=" + format_double(width) + ", fillcolor=\"" + kPalette[bucket] +
           "\", tooltip=\"bin " + dot_escape(bin_label(n.bin_index)) + "; mean f6 " +
           format_double(n.color.mean_f6_raw) + "\"];\n";
  }
  for (const auto& e : g.edges) {
    out += "  n" + std::to_string(e.a) + " -- n" + std::to_string(e.b) +
           " [penwidth=" + format_double(1.0 + std::log2(static_cast<double>(e.weight))) +
           ", weight=" + std::to_string(e.weight) + "];\n";
  }
  out += "}\n";
  return out;
}

namespace {

json term_stat(const TermStat& t) { return json{{"term", t.term}, {"count", t.count}}; }

TermStat read_term_stat(const json& j) {
  return {j.at("term").get<std::string>(), j.at("count").get<std::size_t>()};
}

}  // namespace

std::string to_graph_json(const MapperGraph& g) {
  json doc = json::object();
  doc["tags"] = g.tags;
  json nodes = json::array();
  for (const auto& n : g.nodes) {
    const auto& c = n.color;
    json color = {
        {"mean_f5", c.mean_f5_raw},
        {"mean_f6", c.mean_f6_raw},
        {"mean_f5_scaled", c.mean_f5_scaled},
        {"mean_f6_scaled", c.mean_f6_scaled},
        {"modal_author", term_stat(c.modal_author)},
        {"modal_domain", term_stat(c.modal_domain)},
        {"modal_license", term_stat(c.modal_license)},
        {"tag_counts", c.tag_counts},
    };
    nodes.push_back({{"id", n.id}, {"bin", n.bin_index}, {"members", g.member_names(n)},
                     {"color", color}});
  }
  doc["nodes"] = std::move(nodes);
  json edges = json::array();
  for (const auto& e : g.edges) {
    edges.push_back({{"source", e.a}, {"target", e.b}, {"weight", e.weight}});
  }
  doc["edges"] = std::move(edges);
  return doc.dump(1) + "\n";
}

MapperGraph graph_from_json(std::string_view text) {
  json doc = json::parse(text.begin(), text.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::MalformedDocument, "graph document is not a JSON object");
  }
  try {
    MapperGraph g;
    g.tags = doc.at("tags").get<std::vector<std::string>>();
    std::map<std::string, std::size_t> index;
    std::vector<std::vector<std::string>> member_names;
    for (const auto& jn : doc.at("nodes")) {
      MapperNode n;
      n.id = jn.at("id").get<std::size_t>();
      n.bin_index = jn.at("bin").get<std::vector<int>>();
      const auto& jc = jn.at("color");
      n.color.mean_f5_raw = jc.at("mean_f5").get<double>();
      n.color.mean_f6_raw = jc.at("mean_f6").get<double>();
      n.color.mean_f5_scaled = jc.at("mean_f5_scaled").get<double>();
      n.color.mean_f6_scaled = jc.at("mean_f6_scaled").get<double>();
      n.color.modal_author = read_term_stat(jc.at("modal_author"));
      n.color.modal_domain = read_term_stat(jc.at("modal_domain"));
      n.color.modal_license = read_term_stat(jc.at("modal_license"));
      n.color.tag_counts = jc.at("tag_counts").get<std::vector<std::size_t>>();
      member_names.push_back(jn.at("members").get<std::vector<std::string>>());
      for (const auto& name : member_names.back()) index.emplace(name, 0);
      g.nodes.push_back(std::move(n));
    }
    // Point indices follow name order, as in a name-sorted dataset.
    for (const auto& [name, slot] : index) g.point_names.push_back(name);
    std::size_t i = 0;
    for (auto& [name, slot] : index) slot = i++;
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
      for (const auto& name : member_names[k]) g.nodes[k].members.push_back(index.at(name));
      std::sort(g.nodes[k].members.begin(), g.nodes[k].members.end());
    }
    for (const auto& je : doc.at("edges")) {
      g.edges.push_back({je.at("source").get<std::size_t>(), je.at("target").get<std::size_t>(),
                         je.at("weight").get<std::size_t>()});
    }
    return g;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("bad graph document: ") + e.what());
  }
}

std::string to_node_table(const MapperGraph& g) {
  Table t;
  MapperNode probe;
  probe.color.tag_counts.assign(g.tags.size(), 0);
  t.header = {"id"};
  for (const auto& a : node_attributes(g, probe)) t.header.push_back(a.key);
  t.header.push_back("members");
  for (const auto& n : g.nodes) {
    std::vector<std::string> row = {std::to_string(n.id)};
    for (const auto& a : node_attributes(g, n)) row.push_back(a.value);
    std::string members;
    for (const auto& name : g.member_names(n)) {
      if (!members.empty()) members += ' ';
      members += name;
    }
    row.push_back(members);
    t.rows.push_back(std::move(row));
  }
  return t.to_string();
}

std::string to_edge_table(const MapperGraph& g) {
  Table t;
  t.header = {"source", "target", "weight"};
  for (const auto& e : g.edges) {
    t.rows.push_back({std::to_string(e.a), std::to_string(e.b), std::to_string(e.weight)});
  }
  return t.to_string();
}

}  // namespace ecotopo
