#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ecotopo/feature_corpus.hpp"
#include "ecotopo/lens.hpp"
#include "ecotopo/mapper.hpp"

namespace ecotopo {

inline constexpr std::string_view kToolVersion = "1.0.0";

struct ArchetypeSettings {
  std::size_t k = 0;            // 0: skip, unless the elbow scan picks k
  std::size_t elbow_k_max = 0;  // >= 2 enables the scan
  double elbow_threshold = 0.05;
  int max_iters = 200;
  double tol = 1e-6;
  std::size_t nearest = 5;
};

struct ReportSettings {
  std::size_t top_n = 5;
  std::vector<std::string> set_a = npm_strong_keywords();
  std::vector<std::string> set_b = github_strong_keywords();
};

struct OutputSettings {
  std::vector<std::string> graph_formats = {"graphml", "dot", "json"};
  bool dataset = true;
};

struct PipelineConfig {
  std::filesystem::path input;
  std::filesystem::path output_dir;
  std::uint64_t seed = 42;
  unsigned threads = 1;
  std::size_t sample_size = 10000;  // 0 keeps every record
  std::size_t top_k = 20;
  bool scale_scalars = true;
  EmbeddingOptions embedding;
  LensConfig lens;
  CoverConfig cover;
  ArchetypeSettings archetypes;
  ReportSettings report;
  OutputSettings outputs;
};

// Strict JSON reader: unknown keys and wrong types raise ConfigError.
PipelineConfig parse_config(std::string_view json_text);
PipelineConfig load_config(const std::filesystem::path& path);
// Fully resolved configuration, every default spelled out.
std::string config_to_json(const PipelineConfig& config);

// Per-stage seed derived from the global seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage);

// File name -> content, including manifest.json.
using Artifacts = std::map<std::string, std::string>;

// Runs every stage in memory; nothing touches the output directory.
Artifacts build_artifacts(const PipelineConfig& config);

// build_artifacts() followed by writing each artifact under
// config.output_dir. Returns the written paths.
std::vector<std::filesystem::path> run_pipeline(const PipelineConfig& config);

}  // namespace ecotopo
