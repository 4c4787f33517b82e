// Command-line driver: each pipeline stage is its own subcommand so stages
// can be rerun from cached intermediates; `run` executes everything from a
// config file.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ecotopo/archetypes.hpp"
#include "ecotopo/error.hpp"
#include "ecotopo/feature_corpus.hpp"
#include "ecotopo/graph_io.hpp"
#include "ecotopo/lens.hpp"
#include "ecotopo/manifest.hpp"
#include "ecotopo/mapper.hpp"
#include "ecotopo/pipeline.hpp"
#include "ecotopo/report.hpp"
#include "ecotopo/table.hpp"
#include "ecotopo/vectorize.hpp"

namespace fs = std::filesystem;
using namespace ecotopo;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    if (comma > start) out.push_back(s.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string graph_in_format(const MapperGraph& g, const std::string& format) {
  if (format == "graphml") return to_graphml(g);
  if (format == "dot") return to_dot(g);
  if (format == "json") return to_graph_json(g);
  return to_node_table(g);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ecotopo: topology of a package ecosystem from package.json manifests"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  unsigned threads = threads_from_env(1);
  app.add_option("--threads", threads,
                 "Worker threads (default: $ECOTOPO_THREADS or 1); results are reproducible "
                 "for a fixed count")
      ->check(CLI::PositiveNumber);

  // run
  auto* run = app.add_subcommand("run", "Execute the whole pipeline from a JSON config file");
  std::string config_path;
  run->add_option("--config", config_path, "Pipeline configuration (JSON)")->required();
  std::optional<std::size_t> top_k;
  std::optional<std::string> lens_kind, format;
  std::optional<int> resolution;
  std::optional<double> gain, perplexity;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k_archetypes;
  run->add_option("--top-k", top_k, "Terms kept per feature: 20, 50, 100, 1000 or any K >= 1");
  run->add_option("--lens", lens_kind, "Lens: tsne, pca, eccentricity or feature")
      ->check(CLI::IsMember({"tsne", "pca", "eccentricity", "feature"}));
  run->add_option("--resolution", resolution, "Cover intervals per lens axis");
  run->add_option("--gain", gain, "Cover overlap fraction in [0, 1)");
  run->add_option("--perplexity", perplexity, "t-SNE perplexity");
  run->add_option("--seed", seed, "Global seed");
  run->add_option("--k-archetypes", k_archetypes, "Fit this many archetypes (0 skips)");
  run->add_option("--format", format, "Graph format: graphml, dot or table")
      ->check(CLI::IsMember({"graphml", "dot", "table", "json"}));

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse manifests into canonical records");
  std::string input, records_out, report_out;
  std::size_t sample = 0;
  std::uint64_t ingest_seed = 42;
  ingest->add_option("--input", input, "Directory of *.json manifests or one-per-line file")
      ->required();
  ingest->add_option("--out", records_out, "Canonical records (JSON lines)")->required();
  ingest->add_option("--report", report_out, "Write the ingest report here");
  ingest->add_option("--sample", sample, "Sample this many records (0 keeps all)");
  ingest->add_option("--seed", ingest_seed, "Sampling seed");

  // vectorize
  auto* vectorize = app.add_subcommand("vectorize", "Build rankings, embedding and dataset matrix");
  std::string records_in, dataset_out, rankings_out, embedding_out;
  std::size_t vec_top_k = 20;
  EmbeddingOptions emb;
  bool no_scale = false;
  vectorize->add_option("--records", records_in, "Canonical records")->required();
  vectorize->add_option("--out", dataset_out, "Dataset matrix (TSV)")->required();
  vectorize->add_option("--top-k", vec_top_k, "Terms kept per feature")->check(CLI::PositiveNumber);
  vectorize->add_option("--embedding-dim", emb.dimension, "Keyword embedding dimension");
  vectorize->add_option("--min-count", emb.min_count, "Minimum keyword frequency for the embedding");
  vectorize->add_option("--max-vocabulary", emb.max_vocabulary, "Embedding vocabulary cap");
  vectorize->add_option("--rankings-out", rankings_out, "Write term rankings (TSV)");
  vectorize->add_option("--embedding-out", embedding_out, "Write keyword vectors (TSV)");
  vectorize->add_flag("--no-scale", no_scale, "Keep f5/f6 unscaled");

  // lens
  auto* lens = app.add_subcommand("lens", "Compute lens values for a dataset");
  std::string dataset_in, lens_out, kl_out;
  LensConfig lcfg;
  std::string lens_name = "tsne";
  lens->add_option("--dataset", dataset_in, "Dataset matrix (TSV)")->required();
  lens->add_option("--out", lens_out, "Lens values (TSV)")->required();
  lens->add_option("--lens", lens_name, "tsne, pca, eccentricity or feature")
      ->check(CLI::IsMember({"tsne", "pca", "eccentricity", "feature"}));
  lens->add_option("--output-dim", lcfg.output_dim, "1 or 2")->check(CLI::Range(1, 2));
  lens->add_option("--feature-column", lcfg.feature_column, "Column for the feature lens");
  lens->add_option("--perplexity", lcfg.tsne.perplexity, "t-SNE perplexity");
  lens->add_option("--iterations", lcfg.tsne.iterations, "t-SNE iterations");
  lens->add_option("--learning-rate", lcfg.tsne.learning_rate, "t-SNE learning rate");
  lens->add_option("--seed", lcfg.seed, "t-SNE seed");
  lens->add_option("--kl-out", kl_out, "Write the KL trace (TSV)");

  // mapper
  auto* mapper = app.add_subcommand("mapper", "Build the Mapper graph");
  std::string lens_in, graph_out, mapper_records, graph_format = "graphml";
  CoverConfig cover;
  mapper->add_option("--dataset", dataset_in, "Dataset matrix (TSV)")->required();
  mapper->add_option("--lens-values", lens_in, "Lens values (TSV)")->required();
  mapper->add_option("--records", mapper_records, "Canonical records, for node coloring");
  mapper->add_option("--resolution", cover.resolution, "Intervals per lens axis");
  mapper->add_option("--gain", cover.gain, "Overlap fraction in [0, 1)");
  mapper->add_option("--histogram-bins", cover.histogram_bins, "Bins for the cluster cutoff");
  mapper->add_option("--format", graph_format, "graphml, dot, table or json")
      ->check(CLI::IsMember({"graphml", "dot", "table", "json"}));
  mapper->add_option("--out", graph_out, "Graph file")->required();

  // archetypes
  auto* archetypes = app.add_subcommand("archetypes", "Archetypal analysis of a dataset");
  std::string arch_dir;
  ArchetypeOptions aopt;
  std::size_t elbow_k_max = 0, nearest = 5;
  double elbow_threshold = 0.05;
  archetypes->add_option("--dataset", dataset_in, "Dataset matrix (TSV)")->required();
  archetypes->add_option("--k-archetypes", aopt.k, "Number of archetypes (0: elbow choice)");
  archetypes->add_option("--elbow-k-max", elbow_k_max, "Scan k = 1..K by RSS");
  archetypes->add_option("--elbow-threshold", elbow_threshold, "Relative RSS improvement cutoff");
  archetypes->add_option("--seed", aopt.seed, "Seed");
  archetypes->add_option("--max-iters", aopt.max_iters, "Iteration cap");
  archetypes->add_option("--nearest", nearest, "Packages listed per archetype");
  archetypes->add_option("--out-dir", arch_dir, "Output directory")->required();

  // report
  auto* report = app.add_subcommand("report", "Frequency tables and tag locality");
  std::string report_dir, graph_in, set_a, set_b;
  std::size_t top_n = 5;
  report->add_option("--records", records_in, "Canonical records")->required();
  report->add_option("--graph", graph_in, "Mapper graph (JSON) for tag locality");
  report->add_option("--top-n", top_n, "Rows per table")->check(CLI::PositiveNumber);
  report->add_option("--set-a", set_a, "Comma-separated keywords (default: npm strong)");
  report->add_option("--set-b", set_b, "Comma-separated keywords (default: GitHub strong)");
  report->add_option("--out-dir", report_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      PipelineConfig cfg = load_config(config_path);
      cfg.threads = threads;
      if (top_k) cfg.top_k = *top_k;
      if (lens_kind) cfg.lens.kind = parse_lens_kind(*lens_kind);
      if (resolution) cfg.cover.resolution = *resolution;
      if (gain) cfg.cover.gain = *gain;
      if (perplexity) cfg.lens.tsne.perplexity = *perplexity;
      if (seed) cfg.seed = *seed;
      if (k_archetypes) cfg.archetypes.k = *k_archetypes;
      if (format) cfg.outputs.graph_formats = {*format};
      for (const auto& p : run_pipeline(cfg)) std::cout << p.string() << "\n";
    } else if (*ingest) {
      IngestResult res = ingest_corpus(input);
      res.report.seed = ingest_seed;
      if (sample > 0) res.records = sample_packages(res.records, sample, ingest_seed);
      res.report.sample_size = res.records.size();
      write_file(records_out, write_records(res.records));
      if (!report_out.empty()) write_file(report_out, to_json(res.report));
      std::cerr << "accepted " << res.report.accepted << " of " << res.report.total_seen
                << ", kept " << res.records.size() << "\n";
    } else if (*vectorize) {
      auto records = read_records(read_file(records_in));
      TermRankings rankings = build_term_rankings(records, vec_top_k);
      KeywordEmbedding embedding = train_keyword_embedding(records, emb);
      VectorizeOptions vopt;
      vopt.scale_scalars = !no_scale;
      vopt.threads = threads;
      DatasetMatrix data = assemble_dataset(records, rankings, embedding, vopt);
      write_file(dataset_out, export_dataset(data));
      if (!rankings_out.empty()) write_file(rankings_out, export_rankings(rankings));
      if (!embedding_out.empty()) write_file(embedding_out, export_embedding(embedding));
      std::cerr << data.rows() << " x " << data.layout.total_dim << "\n";
    } else if (*lens) {
      DatasetMatrix data = import_dataset(read_file(dataset_in));
      lcfg.kind = parse_lens_kind(lens_name);
      lcfg.threads = threads;
      std::vector<std::uint64_t> keys;
      for (const auto& name : data.packages) keys.push_back(fnv1a64(name));
      LensValues values = fit_lens(data.matrix, lcfg, keys);
      write_file(lens_out, export_lens(values, data.packages));
      if (!kl_out.empty()) write_file(kl_out, export_kl_trace(values));
    } else if (*mapper) {
      DatasetMatrix data = import_dataset(read_file(dataset_in));
      std::vector<std::string> names;
      LensValues values = import_lens(read_file(lens_in), &names);
      if (names != data.packages) {
        throw Error(ErrorCode::InvalidArgument, "lens rows do not match dataset rows");
      }
      cover.threads = threads;
      std::optional<std::vector<PackageManifestRecord>> records;
      if (!mapper_records.empty()) records = read_records(read_file(mapper_records));
      MapperGraph graph = run_mapper(data, values, cover, records ? &*records : nullptr);
      if (graph_format == "table") {
        write_file(graph_out, to_node_table(graph));
        write_file(fs::path(graph_out).replace_extension(".edges.tsv"), to_edge_table(graph));
      } else {
        write_file(graph_out, graph_in_format(graph, graph_format));
      }
      std::cerr << graph.nodes.size() << " nodes, " << graph.edges.size() << " edges, "
                << connected_components(graph) << " components\n";
    } else if (*archetypes) {
      DatasetMatrix data = import_dataset(read_file(dataset_in));
      aopt.threads = threads;
      fs::path dir(arch_dir);
      if (elbow_k_max >= 2) {
        ElbowScan scan = select_k_elbow(data.matrix, elbow_k_max, elbow_threshold, aopt);
        write_file(dir / "elbow.tsv", export_elbow(scan));
        if (aopt.k == 0) aopt.k = scan.chosen_k;
      }
      if (aopt.k == 0) throw Error(ErrorCode::InvalidArgument, "give --k-archetypes or --elbow-k-max");
      ArchetypeModel model = fit_archetypes(data.matrix, aopt);
      write_file(dir / "archetypes.json", to_json(model));
      write_file(dir / "simplex.tsv",
                 export_simplex(model, data.packages,
                                model.k == 3 ? SimplexMode::Triangle : SimplexMode::Raw));
      write_file(dir / "parallel_coordinates.tsv", export_parallel_coordinates(model, data));
      write_file(dir / "nearest_packages.tsv",
                 export_nearest(nearest_packages(model, data.matrix, data.packages, nearest)));
    } else if (*report) {
      auto records = read_records(read_file(records_in));
      fs::path dir(report_dir);
      std::vector<FrequencyTable> terms, scalars;
      for (Feature f : kTermFeatures) terms.push_back(top_frequency_table(records, f, top_n));
      for (Feature f : {Feature::Version, Feature::Dependencies}) {
        scalars.push_back(top_frequency_table(records, f, top_n));
      }
      write_file(dir / "top_terms.tsv", render_frequency_tables(terms));
      write_file(dir / "top_scalars.tsv", render_frequency_tables(scalars));
      if (!graph_in.empty()) {
        MapperGraph graph = graph_from_json(read_file(graph_in));
        auto a = set_a.empty() ? npm_strong_keywords() : split_list(set_a);
        auto b = set_b.empty() ? github_strong_keywords() : split_list(set_b);
        TagLocalityReport rep = tag_locality(graph, records, a, b);
        write_file(dir / "tag_locality.tsv", export_tag_locality(rep));
        write_file(dir / "tag_locality.json", to_json(rep));
      }
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
