#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ecotopo {

enum class LensKind { Tsne, Pca, Eccentricity, Feature };

std::string_view to_string(LensKind kind);
LensKind parse_lens_kind(std::string_view name);

// Defaults follow the usual exact t-SNE conventions.
struct TsneParams {
  double perplexity = 30.0;
  int iterations = 1000;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  int exaggeration_iters = 250;
  double momentum_initial = 0.5;
  double momentum_final = 0.8;
  int switch_iter = 250;
};

struct LensConfig {
  LensKind kind = LensKind::Tsne;
  int output_dim = 2;
  std::size_t feature_column = 0;  // LensKind::Feature only
  std::uint64_t seed = 0;
  TsneParams tsne;
  unsigned threads = 1;
};

struct KlSample {
  int iteration = 0;
  double kl = 0.0;
};

struct LensValues {
  Eigen::MatrixXd values;  // n x output_dim
  std::vector<KlSample> kl_trace;
};

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& X);

// Row-stochastic Gaussian conditionals p_{j|i}; each row's bandwidth is
// bisected until exp(H(row)) matches `perplexity` (natural-log entropy).
Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& X, double perplexity,
                                       unsigned threads = 1);

// (P_cond + P_cond^T) / 2n. Throws DegenerateDistances when every pair of
// points coincides and InvalidArgument unless n >= 4 and perplexity < n/3.
Eigen::MatrixXd pairwise_affinities(const Eigen::MatrixXd& X, double perplexity,
                                    unsigned threads = 1);

// KL(P || Q) for the Student-t similarities of embedding Y.
double kl_divergence(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Y);
// Analytic gradient of kl_divergence with respect to Y.
Eigen::MatrixXd kl_gradient(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Y,
                            unsigned threads = 1);

// `init_keys`, when given, seeds each point's initial position from
// (seed, key) instead of (seed, row index).
LensValues fit_tsne(const Eigen::MatrixXd& X, const LensConfig& config,
                    std::span<const std::uint64_t> init_keys = {});

struct PrincipalAxes {
  Eigen::VectorXd mean;
  Eigen::MatrixXd directions;  // d x count, unit columns
  Eigen::VectorXd variances;   // descending
};

PrincipalAxes principal_axes(const Eigen::MatrixXd& X, int count);
LensValues fit_pca(const Eigen::MatrixXd& X, int output_dim);

// Mean Euclidean distance from each point to all others.
LensValues fit_eccentricity(const Eigen::MatrixXd& X, unsigned threads = 1);

LensValues fit_feature(const Eigen::MatrixXd& X, std::size_t column);

LensValues fit_lens(const Eigen::MatrixXd& X, const LensConfig& config,
                    std::span<const std::uint64_t> init_keys = {});

// package, lens1[, lens2]
std::string export_lens(const LensValues& lens, const std::vector<std::string>& packages);
LensValues import_lens(std::string_view text, std::vector<std::string>* packages = nullptr);
// iteration, kl
std::string export_kl_trace(const LensValues& lens);

}  // namespace ecotopo
