#include "ecotopo/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "ecotopo/archetypes.hpp"
#include "ecotopo/error.hpp"
#include "ecotopo/graph_io.hpp"
#include "ecotopo/manifest.hpp"
#include "ecotopo/report.hpp"
#include "ecotopo/table.hpp"
#include "ecotopo/vectorize.hpp"
#include "json.hpp"

namespace ecotopo {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::ConfigError, "config: " + what);
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) config_error(where + " must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) config_error("unknown key '" + where + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    config_error("'" + where + key + "' has the wrong type");
  }
}

json lens_json(const LensConfig& l) {
  const auto& t = l.tsne;
  return {{"kind", std::string(to_string(l.kind))},
          {"output_dim", l.output_dim},
          {"feature_column", l.feature_column},
          {"tsne",
           {{"perplexity", t.perplexity},
            {"iterations", t.iterations},
            {"learning_rate", t.learning_rate},
            {"early_exaggeration", t.early_exaggeration},
            {"exaggeration_iters", t.exaggeration_iters},
            {"momentum_initial", t.momentum_initial},
            {"momentum_final", t.momentum_final},
            {"switch_iter", t.switch_iter}}}};
}

json config_json(const PipelineConfig& c) {
  const auto& a = c.archetypes;
  return {
      {"input", c.input.generic_string()},
      {"output_dir", c.output_dir.generic_string()},
      {"seed", c.seed},
      {"threads", c.threads},
      {"sample_size", c.sample_size},
      {"top_k", c.top_k},
      {"scale_scalars", c.scale_scalars},
      {"embedding",
       {{"dimension", c.embedding.dimension},
        {"min_count", c.embedding.min_count},
        {"max_vocabulary", c.embedding.max_vocabulary}}},
      {"lens", lens_json(c.lens)},
      {"cover",
       {{"resolution", c.cover.resolution},
        {"gain", c.cover.gain},
        {"histogram_bins", c.cover.histogram_bins}}},
      {"archetypes",
       {{"k", a.k},
        {"elbow_k_max", a.elbow_k_max},
        {"elbow_threshold", a.elbow_threshold},
        {"max_iters", a.max_iters},
        {"tol", a.tol},
        {"nearest", a.nearest}}},
      {"report", {{"top_n", c.report.top_n}, {"set_a", c.report.set_a}, {"set_b", c.report.set_b}}},
      {"outputs", {{"graph_formats", c.outputs.graph_formats}, {"dataset", c.outputs.dataset}}},
  };
}

}  // namespace

PipelineConfig parse_config(std::string_view text) {
  json doc = json::parse(text.begin(), text.end(), nullptr, false);
  if (doc.is_discarded()) config_error("not valid JSON");
  check_keys(doc, "", {"input", "output_dir", "seed", "threads", "sample_size", "top_k",
                       "scale_scalars", "embedding", "lens", "cover", "archetypes", "report",
                       "outputs"});
  PipelineConfig c;
  std::string input, output;
  read(doc, "input", input, "");
  read(doc, "output_dir", output, "");
  c.input = input;
  c.output_dir = output;
  read(doc, "seed", c.seed, "");
  read(doc, "threads", c.threads, "");
  read(doc, "sample_size", c.sample_size, "");
  read(doc, "top_k", c.top_k, "");
  read(doc, "scale_scalars", c.scale_scalars, "");

  if (auto it = doc.find("embedding"); it != doc.end()) {
    check_keys(*it, "embedding.", {"dimension", "min_count", "max_vocabulary"});
    read(*it, "dimension", c.embedding.dimension, "embedding.");
    read(*it, "min_count", c.embedding.min_count, "embedding.");
    read(*it, "max_vocabulary", c.embedding.max_vocabulary, "embedding.");
  }
  if (auto it = doc.find("lens"); it != doc.end()) {
    check_keys(*it, "lens.", {"kind", "output_dim", "feature_column", "tsne"});
    std::string kind(to_string(c.lens.kind));
    read(*it, "kind", kind, "lens.");
    try {
      c.lens.kind = parse_lens_kind(kind);
    } catch (const Error& e) {
      config_error(e.what());
    }
    read(*it, "output_dim", c.lens.output_dim, "lens.");
    read(*it, "feature_column", c.lens.feature_column, "lens.");
    if (auto t = it->find("tsne"); t != it->end()) {
      check_keys(*t, "lens.tsne.", {"perplexity", "iterations", "learning_rate",
                                    "early_exaggeration", "exaggeration_iters",
                                    "momentum_initial", "momentum_final", "switch_iter"});
      auto& p = c.lens.tsne;
      read(*t, "perplexity", p.perplexity, "lens.tsne.");
      read(*t, "iterations", p.iterations, "lens.tsne.");
      read(*t, "learning_rate", p.learning_rate, "lens.tsne.");
      read(*t, "early_exaggeration", p.early_exaggeration, "lens.tsne.");
      read(*t, "exaggeration_iters", p.exaggeration_iters, "lens.tsne.");
      read(*t, "momentum_initial", p.momentum_initial, "lens.tsne.");
      read(*t, "momentum_final", p.momentum_final, "lens.tsne.");
      read(*t, "switch_iter", p.switch_iter, "lens.tsne.");
    }
  }
  if (auto it = doc.find("cover"); it != doc.end()) {
    check_keys(*it, "cover.", {"resolution", "gain", "histogram_bins"});
    read(*it, "resolution", c.cover.resolution, "cover.");
    read(*it, "gain", c.cover.gain, "cover.");
    read(*it, "histogram_bins", c.cover.histogram_bins, "cover.");
  }
  if (auto it = doc.find("archetypes"); it != doc.end()) {
    check_keys(*it, "archetypes.",
               {"k", "elbow_k_max", "elbow_threshold", "max_iters", "tol", "nearest"});
    auto& a = c.archetypes;
    read(*it, "k", a.k, "archetypes.");
    read(*it, "elbow_k_max", a.elbow_k_max, "archetypes.");
    read(*it, "elbow_threshold", a.elbow_threshold, "archetypes.");
    read(*it, "max_iters", a.max_iters, "archetypes.");
    read(*it, "tol", a.tol, "archetypes.");
    read(*it, "nearest", a.nearest, "archetypes.");
  }
  if (auto it = doc.find("report"); it != doc.end()) {
    check_keys(*it, "report.", {"top_n", "set_a", "set_b"});
    read(*it, "top_n", c.report.top_n, "report.");
    read(*it, "set_a", c.report.set_a, "report.");
    read(*it, "set_b", c.report.set_b, "report.");
  }
  if (auto it = doc.find("outputs"); it != doc.end()) {
    check_keys(*it, "outputs.", {"graph_formats", "dataset"});
    read(*it, "graph_formats", c.outputs.graph_formats, "outputs.");
    read(*it, "dataset", c.outputs.dataset, "outputs.");
  }

  if (c.input.empty()) config_error("'input' is required");
  if (c.output_dir.empty()) config_error("'output_dir' is required");
  if (c.top_k < 1) config_error("'top_k' must be >= 1");
  if (c.threads < 1) config_error("'threads' must be >= 1");
  if (c.cover.resolution < 1) config_error("'cover.resolution' must be >= 1");
  if (!(c.cover.gain >= 0.0 && c.cover.gain < 1.0)) config_error("'cover.gain' must lie in [0, 1)");
  if (c.lens.output_dim != 1 && c.lens.output_dim != 2) config_error("'lens.output_dim' must be 1 or 2");
  for (const auto& f : c.outputs.graph_formats) {
    if (f != "graphml" && f != "dot" && f != "json" && f != "table") {
      config_error("unknown graph format '" + f + "'");
    }
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path));
}

std::string config_to_json(const PipelineConfig& config) {
  return config_json(config).dump(2) + "\n";
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage) {
  return splitmix64(seed ^ fnv1a64(stage));
}

Artifacts build_artifacts(const PipelineConfig& config) {
  Artifacts out;
  const unsigned threads = config.threads;

  IngestResult ingest = ingest_corpus(config.input);
  std::vector<PackageManifestRecord> records = std::move(ingest.records);
  const std::uint64_t sample_seed = derive_seed(config.seed, "sample");
  if (config.sample_size > 0) {
    records = sample_packages(records, config.sample_size, sample_seed);
  }
  ingest.report.sample_size = records.size();
  ingest.report.seed = sample_seed;
  out["records.jsonl"] = write_records(records);
  out["ingest_report.json"] = to_json(ingest.report);

  TermRankings rankings = build_term_rankings(records, config.top_k);
  KeywordEmbedding embedding = train_keyword_embedding(records, config.embedding);
  out["rankings.tsv"] = export_rankings(rankings);
  out["embedding.tsv"] = export_embedding(embedding);

  VectorizeOptions vopt;
  vopt.scale_scalars = config.scale_scalars;
  vopt.threads = threads;
  DatasetMatrix data = assemble_dataset(records, rankings, embedding, vopt);
  if (config.outputs.dataset) out["dataset.tsv"] = export_dataset(data);

  LensConfig lens_cfg = config.lens;
  lens_cfg.seed = derive_seed(config.seed, "lens");
  lens_cfg.threads = threads;
  std::vector<std::uint64_t> keys;
  keys.reserve(data.packages.size());
  for (const auto& name : data.packages) keys.push_back(fnv1a64(name));
  LensValues lens = fit_lens(data.matrix, lens_cfg, keys);
  out["lens.tsv"] = export_lens(lens, data.packages);
  if (!lens.kl_trace.empty()) out["kl_trace.tsv"] = export_kl_trace(lens);

  std::vector<std::string> tags;
  for (const auto* set : {&config.report.set_b, &config.report.set_a}) {
    for (const auto& t : *set) {
      if (std::find(tags.begin(), tags.end(), t) == tags.end()) tags.push_back(t);
    }
  }
  CoverConfig cover = config.cover;
  cover.threads = threads;
  MapperGraph graph = run_mapper(data, lens, cover, &records, tags);
  for (const auto& f : config.outputs.graph_formats) {
    if (f == "graphml") out["graph.graphml"] = to_graphml(graph);
    if (f == "dot") out["graph.dot"] = to_dot(graph);
    if (f == "json") out["graph.json"] = to_graph_json(graph);
    if (f == "table") {
      out["graph_nodes.tsv"] = to_node_table(graph);
      out["graph_edges.tsv"] = to_edge_table(graph);
    }
  }

  std::vector<FrequencyTable> terms, scalars;
  for (Feature f : kTermFeatures) terms.push_back(top_frequency_table(records, f, config.report.top_n));
  for (Feature f : {Feature::Version, Feature::Dependencies}) {
    scalars.push_back(top_frequency_table(records, f, config.report.top_n));
  }
  out["top_terms.tsv"] = render_frequency_tables(terms);
  out["top_scalars.tsv"] = render_frequency_tables(scalars);
  TagLocalityReport locality =
      tag_locality(graph, records, config.report.set_a, config.report.set_b);
  out["tag_locality.tsv"] = export_tag_locality(locality);
  out["tag_locality.json"] = to_json(locality);

  const auto& arch = config.archetypes;
  std::size_t k = arch.k;
  ArchetypeOptions aopt;
  aopt.seed = derive_seed(config.seed, "archetypes");
  aopt.max_iters = arch.max_iters;
  aopt.tol = arch.tol;
  aopt.threads = threads;
  if (arch.elbow_k_max >= 2) {
    ElbowScan scan = select_k_elbow(data.matrix, arch.elbow_k_max, arch.elbow_threshold, aopt);
    out["elbow.tsv"] = export_elbow(scan);
    if (k == 0) k = scan.chosen_k;
  }
  if (k > 0) {
    aopt.k = k;
    ArchetypeModel model = fit_archetypes(data.matrix, aopt);
    out["archetypes.json"] = to_json(model);
    out["simplex.tsv"] = export_simplex(model, data.packages,
                                        k == 3 ? SimplexMode::Triangle : SimplexMode::Raw);
    out["parallel_coordinates.tsv"] = export_parallel_coordinates(model, data);
    out["nearest_packages.tsv"] =
        export_nearest(nearest_packages(model, data.matrix, data.packages, arch.nearest));
  }

  const std::string resolved = config_to_json(config);
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a64(resolved)));
  json manifest = json::object();
  manifest["tool"] = "ecotopo";
  manifest["version"] = std::string(kToolVersion);
  manifest["config_hash"] = std::string(hash);
  manifest["seed"] = config.seed;
  manifest["threads"] = threads;
  manifest["derived_seeds"] = {{"sample", sample_seed},
                               {"lens", lens_cfg.seed},
                               {"archetypes", aopt.seed}};
  manifest["config"] = config_json(config);
  PipelineConfig defaults;
  defaults.input = "";
  defaults.output_dir = "";
  json default_json = config_json(defaults);
  default_json.erase("input");
  default_json.erase("output_dir");
  manifest["defaults"] = default_json;
  manifest["counts"] = {{"packages", data.packages.size()},
                        {"dimensions", data.layout.total_dim},
                        {"nodes", graph.nodes.size()},
                        {"edges", graph.edges.size()},
                        {"components", connected_components(graph)}};
  json files = json::array();
  for (const auto& [name, content] : out) {
    char h[17];
    std::snprintf(h, sizeof h, "%016llx", static_cast<unsigned long long>(fnv1a64(content)));
    files.push_back({{"name", name}, {"bytes", content.size()}, {"fnv1a64", std::string(h)}});
  }
  manifest["artifacts"] = std::move(files);
  out["manifest.json"] = manifest.dump(2) + "\n";
  return out;
}

std::vector<std::filesystem::path> run_pipeline(const PipelineConfig& config) {
  Artifacts artifacts = build_artifacts(config);
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) {
    throw Error(ErrorCode::IoFailure, "cannot create " + config.output_dir.string());
  }
  std::vector<std::filesystem::path> written;
  for (const auto& [name, content] : artifacts) {
    auto path = config.output_dir / name;
    write_file(path, content);
    written.push_back(path);
  }
  return written;
}

}  // namespace ecotopo
