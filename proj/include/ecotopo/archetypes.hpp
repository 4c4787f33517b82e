#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ecotopo/vectorize.hpp"

namespace ecotopo {

// Lawson-Hanson active-set solution of min ||Ax - b|| subject to x >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

// min ||basis * w - target|| over the probability simplex, via NNLS on the
// system augmented with a row `penalty * 1^T = penalty`. The result is
// rescaled to sum to exactly one.
Eigen::VectorXd simplex_least_squares(const Eigen::MatrixXd& basis, const Eigen::VectorXd& target,
                                      double penalty);

struct ArchetypeState {
  int iteration = 0;
  const Eigen::MatrixXd* alpha = nullptr;
  const Eigen::MatrixXd* beta = nullptr;
  double rss = 0.0;
};

struct ArchetypeOptions {
  std::size_t k = 3;
  std::uint64_t seed = 0;
  int max_iters = 200;
  double tol = 1e-6;
  double penalty = 200.0;
  unsigned threads = 1;
  // Called after every completed alpha/beta iteration.
  std::function<void(const ArchetypeState&)> observer;
};

struct ArchetypeModel {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd archetypes;  // k x d, equals beta * X
  Eigen::MatrixXd alpha;       // n x k, rows on the simplex
  Eigen::MatrixXd beta;        // k x n, rows on the simplex
  std::vector<double> rss_trace;
  bool converged = false;
};

double residual_sum_of_squares(const Eigen::MatrixXd& X, const Eigen::MatrixXd& alpha,
                               const Eigen::MatrixXd& archetypes);

// Alternating simplex-constrained least squares for X ~ alpha * beta * X.
// Throws RankDeficientData when all rows coincide and k > 1.
ArchetypeModel fit_archetypes(const Eigen::MatrixXd& X, const ArchetypeOptions& options);

struct ElbowScan {
  std::vector<std::pair<std::size_t, double>> candidates;  // (k, final RSS)
  std::size_t chosen_k = 1;
};

// Fits k = 1..k_max. With improvement(k) = (RSS[k-1] - RSS[k]) / RSS[k-1],
// chosen_k is one less than the first k whose improvement drops below
// `threshold`, or k_max when none does. An RSS at or below
// `explained_floor * RSS[1]` counts as fully explained (improvement 0), so
// archetypes fitted to jitter alone do not extend the scan.
ElbowScan select_k_elbow(const Eigen::MatrixXd& X, std::size_t k_max, double threshold,
                         const ArchetypeOptions& base, double explained_floor = 1e-3);

struct NearPackage {
  std::string name;
  double distance = 0.0;
};

std::vector<std::vector<NearPackage>> nearest_packages(const ArchetypeModel& model,
                                                       const Eigen::MatrixXd& X,
                                                       const std::vector<std::string>& names,
                                                       std::size_t per_archetype);

// label, is_archetype, <layout columns>; each column min-max normalized over
// the packages. Archetype rows are labelled A1..Ak.
std::string export_parallel_coordinates(const ArchetypeModel& model, const DatasetMatrix& data);

// Barycentric placement of alpha rows on the triangle (0,0), (1,0),
// (1/2, sqrt(3)/2). Throws KNotThree.
Eigen::MatrixXd simplex_positions(const ArchetypeModel& model);

enum class SimplexMode { Triangle, Raw };

// Triangle: package, x, y. Raw: package, a1..ak.
std::string export_simplex(const ArchetypeModel& model, const std::vector<std::string>& names,
                           SimplexMode mode = SimplexMode::Triangle);

std::string export_nearest(const std::vector<std::vector<NearPackage>>& lists);
std::string export_elbow(const ElbowScan& scan);

std::string to_json(const ArchetypeModel& model);
ArchetypeModel archetypes_from_json(std::string_view text);

}  // namespace ecotopo
