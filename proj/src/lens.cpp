#include "ecotopo/lens.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ecotopo/error.hpp"
#include "ecotopo/linalg.hpp"
#include "ecotopo/table.hpp"

namespace ecotopo {

namespace {

constexpr double kQFloor = 1e-12;
constexpr double kPerplexityTol = 1e-5;
constexpr int kMaxBisections = 64;
constexpr int kMaxBracketSteps = 2000;
constexpr double kMinGain = 0.01;
constexpr int kMaxStepHalvings = 30;

// Entropy (nats) of the Gaussian conditional with precision `beta` over
// shifted squared distances; fills `p` with the normalized row.
double row_entropy(const std::vector<double>& shifted, double beta, std::vector<double>& p) {
  double sum = 0.0;
  double weighted = 0.0;
  for (std::size_t j = 0; j < shifted.size(); ++j) {
    p[j] = std::exp(-beta * shifted[j]);
    sum += p[j];
    weighted += shifted[j] * p[j];
  }
  for (auto& v : p) v /= sum;
  return std::log(sum) + beta * weighted / sum;
}

void check_tsne_input(const Eigen::MatrixXd& X, double perplexity) {
  const auto n = static_cast<double>(X.rows());
  if (X.rows() < 4) {
    throw Error(ErrorCode::InvalidArgument, "t-SNE needs at least 4 points");
  }
  if (!(perplexity > 0.0) || !(perplexity < n / 3.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "perplexity must lie in (0, n/3); got " + format_double(perplexity) +
                    " for n = " + std::to_string(X.rows()));
  }
}

}  // namespace

std::string_view to_string(LensKind kind) {
  switch (kind) {
    case LensKind::Tsne: return "tsne";
    case LensKind::Pca: return "pca";
    case LensKind::Eccentricity: return "eccentricity";
    case LensKind::Feature: return "feature";
  }
  return "?";
}

LensKind parse_lens_kind(std::string_view name) {
  for (LensKind k : {LensKind::Tsne, LensKind::Pca, LensKind::Eccentricity, LensKind::Feature}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown lens '" + std::string(name) + "'");
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double d = (X.row(i) - X.row(j)).squaredNorm();
      D(i, j) = d;
      D(j, i) = d;
    }
  }
  return D;
}

Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& X, double perplexity,
                                       unsigned threads) {
  check_tsne_input(X, perplexity);
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd D = squared_distances(X);
  if (D.maxCoeff() <= 0.0) {
    throw Error(ErrorCode::DegenerateDistances, "all pairwise distances are zero");
  }
  const double target = std::log(perplexity);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);

  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    std::vector<double> shifted;
    shifted.reserve(static_cast<std::size_t>(n - 1));
    double dmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) dmin = std::min(dmin, D(i, j));
    }
    double mean = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      shifted.push_back(D(i, j) - dmin);
      mean += shifted.back();
    }
    mean /= static_cast<double>(shifted.size());
    std::vector<double> p(shifted.size());

    double beta = mean > 0.0 ? 1.0 / mean : 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    auto close_enough = [&](double h) {
      return std::abs(std::exp(h) - perplexity) < kPerplexityTol;
    };
    double h = row_entropy(shifted, beta, p);
    // Bracket: entropy falls as beta grows.
    for (int step = 0; step < kMaxBracketSteps && !close_enough(h); ++step) {
      if (h > target) {
        lo = beta;
        if (std::isfinite(hi) || beta > 1e300) break;
        beta *= 2.0;
      } else {
        hi = beta;
        if (lo > 0.0) break;
        beta /= 2.0;
        if (beta < std::numeric_limits<double>::min()) break;
      }
      h = row_entropy(shifted, beta, p);
    }
    for (int step = 0; step < kMaxBisections && !close_enough(h) && std::isfinite(hi); ++step) {
      beta = lo > 0.0 ? std::sqrt(lo * hi) : hi / 2.0;
      if (beta == lo || beta == hi) break;
      h = row_entropy(shifted, beta, p);
      if (h > target) {
        lo = beta;
      } else {
        hi = beta;
      }
    }
    std::size_t k = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) P(i, j) = p[k++];
    }
  });
  return P;
}

Eigen::MatrixXd pairwise_affinities(const Eigen::MatrixXd& X, double perplexity,
                                    unsigned threads) {
  Eigen::MatrixXd C = conditional_affinities(X, perplexity, threads);
  const double n = static_cast<double>(X.rows());
  Eigen::MatrixXd P = (C + C.transpose()) / (2.0 * n);
  return P;
}

namespace {

// Row sums of the Student-t kernel 1 / (1 + |yi - yj|^2), i != j.
Eigen::VectorXd kernel_row_sums(const Eigen::MatrixXd& Y, unsigned threads) {
  const Eigen::Index n = Y.rows();
  Eigen::VectorXd sums(n);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) s += 1.0 / (1.0 + (Y.row(i) - Y.row(j)).squaredNorm());
    }
    sums(i) = s;
  });
  return sums;
}

double kernel_total(const Eigen::VectorXd& row_sums) {
  double z = 0.0;
  for (Eigen::Index i = 0; i < row_sums.size(); ++i) z += row_sums(i);
  return std::max(z, kQFloor);
}

}  // namespace

double kl_divergence(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Y) {
  const Eigen::Index n = Y.rows();
  const double z = kernel_total(kernel_row_sums(Y, 1));
  double kl = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || P(i, j) <= 0.0) continue;
      double q = 1.0 / (1.0 + (Y.row(i) - Y.row(j)).squaredNorm()) / z;
      kl += P(i, j) * std::log(P(i, j) / std::max(q, kQFloor));
    }
  }
  return kl;
}

Eigen::MatrixXd kl_gradient(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Y,
                            unsigned threads) {
  const Eigen::Index n = Y.rows();
  const double z = kernel_total(kernel_row_sums(Y, threads));
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n, Y.cols());
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(Y.cols());
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      Eigen::RowVectorXd diff = Y.row(i) - Y.row(j);
      double num = 1.0 / (1.0 + diff.squaredNorm());
      g += (4.0 * (P(i, j) - num / z) * num) * diff;
    }
    grad.row(i) = g;
  });
  return grad;
}

LensValues fit_tsne(const Eigen::MatrixXd& X, const LensConfig& config,
                    std::span<const std::uint64_t> init_keys) {
  const auto& prm = config.tsne;
  if (config.output_dim != 1 && config.output_dim != 2) {
    throw Error(ErrorCode::InvalidArgument, "t-SNE output_dim must be 1 or 2");
  }
  if (!init_keys.empty() && init_keys.size() != static_cast<std::size_t>(X.rows())) {
    throw Error(ErrorCode::InvalidArgument, "one init key per point required");
  }
  const Eigen::Index n = X.rows();
  const Eigen::Index dims = config.output_dim;
  Eigen::MatrixXd P = pairwise_affinities(X, prm.perplexity, config.threads);

  Eigen::MatrixXd Y(n, dims);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::uint64_t key = init_keys.empty() ? static_cast<std::uint64_t>(i)
                                          : init_keys[static_cast<std::size_t>(i)];
    Rng rng(splitmix64(config.seed) ^ splitmix64(key + 0x51ed27ULL));
    for (Eigen::Index c = 0; c < dims; ++c) Y(i, c) = 1e-4 * rng.gaussian();
  }

  LensValues out;
  out.kl_trace.push_back({0, kl_divergence(P, Y)});

  Eigen::MatrixXd update = Eigen::MatrixXd::Zero(n, dims);
  Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, dims);
  Eigen::MatrixXd exaggerated = P * prm.early_exaggeration;
  double kl_now = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < prm.iterations; ++iter) {
    const bool early = iter < prm.exaggeration_iters;
    const double momentum = iter < prm.switch_iter ? prm.momentum_initial : prm.momentum_final;
    Eigen::MatrixXd grad = kl_gradient(early ? exaggerated : P, Y, config.threads);
    Eigen::MatrixXd next_update(n, dims);
    Eigen::MatrixXd next_gains = gains;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index c = 0; c < dims; ++c) {
        double& gain = next_gains(i, c);
        gain = ((grad(i, c) > 0.0) != (update(i, c) > 0.0)) ? gain + 0.2 : gain * 0.8;
        gain = std::max(gain, kMinGain);
        next_update(i, c) = momentum * update(i, c) - prm.learning_rate * gain * grad(i, c);
      }
    }
    Eigen::MatrixXd next = Y + next_update;
    next.rowwise() -= next.colwise().mean();

    if (!early) {
      // Once exaggeration is off, a step is kept only if KL does not grow;
      // otherwise momentum and gains restart and the plain gradient step
      // is halved until it descends.
      if (!std::isfinite(kl_now)) kl_now = kl_divergence(P, Y);
      double kl_next = kl_divergence(P, next);
      if (kl_next > kl_now) {
        next_gains.setOnes();
        double step = prm.learning_rate;
        bool accepted = false;
        for (int halving = 0; halving < kMaxStepHalvings; ++halving, step *= 0.5) {
          next_update = -step * grad;
          next = Y + next_update;
          next.rowwise() -= next.colwise().mean();
          kl_next = kl_divergence(P, next);
          if (kl_next <= kl_now) {
            accepted = true;
            break;
          }
        }
        if (!accepted) {
          next = Y;
          next_update.setZero();
          kl_next = kl_now;
        }
      }
      kl_now = kl_next;
    }
    Y = std::move(next);
    update = std::move(next_update);
    gains = std::move(next_gains);

    const int done = iter + 1;
    if (done % 10 == 0 || done == prm.iterations) {
      out.kl_trace.push_back({done, early ? kl_divergence(P, Y) : kl_now});
    }
  }
  out.values = std::move(Y);
  return out;
}

PrincipalAxes principal_axes(const Eigen::MatrixXd& X, int count) {
  if (X.rows() < 2) throw Error(ErrorCode::InvalidArgument, "PCA needs at least 2 points");
  PrincipalAxes axes;
  axes.mean = X.colwise().mean().transpose();
  Eigen::MatrixXd centered = X.rowwise() - axes.mean.transpose();
  const double denom = static_cast<double>(X.rows() - 1);
  const Eigen::Index want = std::min<Eigen::Index>(count, std::min(X.rows(), X.cols()));
  if (X.cols() <= X.rows()) {
    Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
    Eigenpairs pairs = leading_eigenpairs(cov, want);
    axes.directions = pairs.vectors;
    axes.variances = pairs.values;
  } else {
    // Fewer points than columns: decompose the Gram matrix instead.
    Eigen::MatrixXd gram = (centered * centered.transpose()) / denom;
    Eigenpairs pairs = leading_eigenpairs(gram, want);
    axes.variances = pairs.values;
    axes.directions = Eigen::MatrixXd::Zero(X.cols(), pairs.values.size());
    for (Eigen::Index c = 0; c < pairs.values.size(); ++c) {
      Eigen::VectorXd dir = centered.transpose() * pairs.vectors.col(c);
      double norm = dir.norm();
      if (norm > 0.0) axes.directions.col(c) = dir / norm;
    }
    canonicalize_signs(axes.directions);
  }
  // Pad with zero axes when the data has fewer columns than requested.
  if (axes.directions.cols() < count) {
    Eigen::Index have = axes.directions.cols();
    axes.directions.conservativeResize(X.cols(), count);
    axes.variances.conservativeResize(count);
    for (Eigen::Index c = have; c < count; ++c) {
      axes.directions.col(c).setZero();
      axes.variances(c) = 0.0;
    }
  }
  return axes;
}

LensValues fit_pca(const Eigen::MatrixXd& X, int output_dim) {
  if (output_dim != 1 && output_dim != 2) {
    throw Error(ErrorCode::InvalidArgument, "PCA output_dim must be 1 or 2");
  }
  PrincipalAxes axes = principal_axes(X, output_dim);
  LensValues out;
  out.values = (X.rowwise() - axes.mean.transpose()) * axes.directions;
  return out;
}

LensValues fit_eccentricity(const Eigen::MatrixXd& X, unsigned threads) {
  const Eigen::Index n = X.rows();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "eccentricity needs at least 2 points");
  LensValues out;
  out.values.resize(n, 1);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      double sq = 0.0;
      for (Eigen::Index c = 0; c < X.cols(); ++c) {
        double d = X(i, c) - X(j, c);
        sq += d * d;
      }
      sum += std::sqrt(sq);
    }
    out.values(i, 0) = sum / static_cast<double>(n - 1);
  });
  return out;
}

LensValues fit_feature(const Eigen::MatrixXd& X, std::size_t column) {
  if (column >= static_cast<std::size_t>(X.cols())) {
    throw Error(ErrorCode::InvalidArgument,
                "feature column " + std::to_string(column) + " out of range");
  }
  LensValues out;
  out.values = X.col(static_cast<Eigen::Index>(column));
  return out;
}

LensValues fit_lens(const Eigen::MatrixXd& X, const LensConfig& config,
                    std::span<const std::uint64_t> init_keys) {
  switch (config.kind) {
    case LensKind::Tsne: return fit_tsne(X, config, init_keys);
    case LensKind::Pca: return fit_pca(X, config.output_dim);
    case LensKind::Eccentricity: return fit_eccentricity(X, config.threads);
    case LensKind::Feature: return fit_feature(X, config.feature_column);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown lens kind");
}

std::string export_lens(const LensValues& lens, const std::vector<std::string>& packages) {
  Table t;
  t.header = {"package"};
  for (Eigen::Index c = 0; c < lens.values.cols(); ++c) {
    t.header.push_back("lens" + std::to_string(c + 1));
  }
  for (Eigen::Index i = 0; i < lens.values.rows(); ++i) {
    std::vector<std::string> row = {packages.at(static_cast<std::size_t>(i))};
    for (Eigen::Index c = 0; c < lens.values.cols(); ++c) {
      row.push_back(format_double(lens.values(i, c)));
    }
    t.rows.push_back(std::move(row));
  }
  return t.to_string();
}

LensValues import_lens(std::string_view text, std::vector<std::string>* packages) {
  Table t = Table::parse(text);
  if (t.header.size() < 2) throw Error(ErrorCode::MalformedDocument, "lens table has no values");
  LensValues lens;
  const auto cols = static_cast<Eigen::Index>(t.header.size() - 1);
  lens.values.resize(static_cast<Eigen::Index>(t.rows.size()), cols);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (packages) packages->push_back(t.rows[i][0]);
    for (Eigen::Index c = 0; c < cols; ++c) {
      lens.values(static_cast<Eigen::Index>(i), c) =
          parse_double(t.rows[i][static_cast<std::size_t>(c + 1)]);
    }
  }
  return lens;
}

std::string export_kl_trace(const LensValues& lens) {
  Table t;
  t.header = {"iteration", "kl"};
  for (const auto& s : lens.kl_trace) {
    t.rows.push_back({std::to_string(s.iteration), format_double(s.kl)});
  }
  return t.to_string();
}

}  // namespace ecotopo
