#include "ecotopo/archetypes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ecotopo/error.hpp"
#include "ecotopo/table.hpp"
#include "json.hpp"

namespace ecotopo {

Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<char> passive(static_cast<std::size_t>(n), 0);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() *
                     A.cwiseAbs().colwise().sum().maxCoeff() * static_cast<double>(std::max(m, n));

  auto solve_passive = [&](Eigen::VectorXd& s) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (passive[static_cast<std::size_t>(j)]) cols.push_back(j);
    }
    Eigen::MatrixXd Ap(m, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) Ap.col(static_cast<Eigen::Index>(c)) = A.col(cols[c]);
    Eigen::VectorXd sp = Ap.colPivHouseholderQr().solve(b);
    s.setZero(n);
    for (std::size_t c = 0; c < cols.size(); ++c) s(cols[c]) = sp(static_cast<Eigen::Index>(c));
  };

  Eigen::VectorXd w = A.transpose() * (b - A * x);
  const int max_outer = static_cast<int>(3 * n + 10);
  Eigen::VectorXd s(n);
  for (int outer = 0; outer < max_outer; ++outer) {
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = 1;

    for (int inner = 0; inner <= static_cast<int>(n); ++inner) {
      solve_passive(s);
      double step = 1.0;
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && s(j) <= 0.0) {
          feasible = false;
          double denom = x(j) - s(j);
          if (denom > 0.0) step = std::min(step, x(j) / denom);
        }
      }
      if (feasible) break;
      x += step * (s - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x(j) <= tol) {
          passive[static_cast<std::size_t>(j)] = 0;
          x(j) = 0.0;
        }
      }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      x(j) = passive[static_cast<std::size_t>(j)] ? std::max(s(j), 0.0) : 0.0;
    }
    w = A.transpose() * (b - A * x);
  }
  return x;
}

Eigen::VectorXd simplex_least_squares(const Eigen::MatrixXd& basis, const Eigen::VectorXd& target,
                                      double penalty) {
  const Eigen::Index d = basis.rows();
  const Eigen::Index k = basis.cols();
  Eigen::MatrixXd A(d + 1, k);
  A.topRows(d) = basis;
  A.row(d).setConstant(penalty);
  Eigen::VectorXd b(d + 1);
  b.head(d) = target;
  b(d) = penalty;
  Eigen::VectorXd w = nnls(A, b);
  double sum = w.sum();
  if (sum > 0.0) {
    w /= sum;
  } else {
    w.setConstant(1.0 / static_cast<double>(k));
  }
  return w;
}

double residual_sum_of_squares(const Eigen::MatrixXd& X, const Eigen::MatrixXd& alpha,
                               const Eigen::MatrixXd& archetypes) {
  return (X - alpha * archetypes).squaredNorm();
}

namespace {

// Furthest-point traversal starting from the point furthest from the mean;
// the seed only breaks exact ties.
std::vector<Eigen::Index> furthest_point_seeds(const Eigen::MatrixXd& X, std::size_t k,
                                               std::uint64_t seed) {
  const Eigen::Index n = X.rows();
  Rng rng(seed);
  auto pick = [&](const Eigen::VectorXd& score, const std::vector<char>& taken) {
    double best = -1.0;
    std::vector<Eigen::Index> ties;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      if (score(i) > best) {
        best = score(i);
        ties.assign(1, i);
      } else if (score(i) == best) {
        ties.push_back(i);
      }
    }
    return ties[static_cast<std::size_t>(rng.below(ties.size()))];
  };

  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  Eigen::RowVectorXd mean = X.colwise().mean();
  Eigen::VectorXd score = (X.rowwise() - mean).rowwise().squaredNorm();
  std::vector<Eigen::Index> chosen;
  chosen.push_back(pick(score, taken));
  taken[static_cast<std::size_t>(chosen.back())] = 1;
  Eigen::VectorXd nearest = (X.rowwise() - X.row(chosen.back())).rowwise().squaredNorm();
  while (chosen.size() < k) {
    chosen.push_back(pick(nearest, taken));
    taken[static_cast<std::size_t>(chosen.back())] = 1;
    Eigen::VectorXd d = (X.rowwise() - X.row(chosen.back())).rowwise().squaredNorm();
    nearest = nearest.cwiseMin(d);
  }
  return chosen;
}

}  // namespace

ArchetypeModel fit_archetypes(const Eigen::MatrixXd& X, const ArchetypeOptions& opt) {
  const Eigen::Index n = X.rows();
  const auto k = static_cast<Eigen::Index>(opt.k);
  if (k < 1 || k > n) {
    throw Error(ErrorCode::InvalidArgument,
                "archetype count must lie in [1, n]; got " + std::to_string(opt.k));
  }
  if (!X.allFinite()) throw Error(ErrorCode::InvalidArgument, "data contains non-finite values");
  if (k > 1 && (X.rowwise() - X.row(0)).cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorCode::RankDeficientData, "all points coincide; cannot fit k > 1 archetypes");
  }

  ArchetypeModel model;
  model.k = opt.k;
  model.seed = opt.seed;
  model.beta = Eigen::MatrixXd::Zero(k, n);
  auto seeds = furthest_point_seeds(X, opt.k, opt.seed);
  for (Eigen::Index j = 0; j < k; ++j) model.beta(j, seeds[static_cast<std::size_t>(j)]) = 1.0;
  model.archetypes = model.beta * X;
  model.alpha = Eigen::MatrixXd::Zero(n, k);

  const Eigen::MatrixXd Xt = X.transpose();
  double previous = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= opt.max_iters; ++iter) {
    // Alpha step: per-row simplex regression on the archetypes, guarded by
    // an exact line search from the previous row so no residual grows.
    const Eigen::MatrixXd Zt = model.archetypes.transpose();
    parallel_for(static_cast<std::size_t>(n), opt.threads, [&](std::size_t row) {
      const auto i = static_cast<Eigen::Index>(row);
      Eigen::VectorXd x = X.row(i).transpose();
      Eigen::VectorXd fresh = simplex_least_squares(Zt, x, opt.penalty);
      if (iter == 1) {
        model.alpha.row(i) = fresh.transpose();
        return;
      }
      Eigen::VectorXd old = model.alpha.row(i).transpose();
      Eigen::VectorXd r0 = x - Zt * old;
      Eigen::VectorXd delta = Zt * (fresh - old);
      double dd = delta.squaredNorm();
      double t = dd > 0.0 ? std::clamp(r0.dot(delta) / dd, 0.0, 1.0) : 0.0;
      Eigen::VectorXd cand = old + t * (fresh - old);
      if ((x - Zt * cand).squaredNorm() <= r0.squaredNorm()) {
        cand = cand.cwiseMax(0.0);
        model.alpha.row(i) = (cand / cand.sum()).transpose();
      }
    });
    const double rss_alpha = residual_sum_of_squares(X, model.alpha, model.archetypes);

    // Beta step: unconstrained archetype targets, projected onto the data's
    // convex hull, then a line search from the current beta.
    Eigen::MatrixXd targets = model.alpha.completeOrthogonalDecomposition().solve(X);
    Eigen::MatrixXd fresh_beta(k, n);
    parallel_for(static_cast<std::size_t>(k), opt.threads, [&](std::size_t j) {
      const auto r = static_cast<Eigen::Index>(j);
      fresh_beta.row(r) =
          simplex_least_squares(Xt, targets.row(r).transpose(), opt.penalty).transpose();
    });
    const Eigen::MatrixXd fresh_z = fresh_beta * X;
    const Eigen::MatrixXd residual = X - model.alpha * model.archetypes;
    const Eigen::MatrixXd delta = model.alpha * (fresh_z - model.archetypes);
    const double dd = delta.squaredNorm();
    const double t = dd > 0.0 ? std::clamp((residual.cwiseProduct(delta)).sum() / dd, 0.0, 1.0)
                              : 0.0;
    double rss = rss_alpha;
    if (t > 0.0) {
      Eigen::MatrixXd beta = model.beta + t * (fresh_beta - model.beta);
      for (Eigen::Index j = 0; j < k; ++j) {
        Eigen::RowVectorXd row = beta.row(j).cwiseMax(0.0);
        beta.row(j) = row / row.sum();
      }
      Eigen::MatrixXd z = beta * X;
      double candidate = residual_sum_of_squares(X, model.alpha, z);
      if (candidate <= rss_alpha) {
        model.beta = std::move(beta);
        model.archetypes = std::move(z);
        rss = candidate;
      }
    }

    model.rss_trace.push_back(rss);
    if (opt.observer) opt.observer({iter, &model.alpha, &model.beta, rss});
    if (rss == 0.0 || (std::isfinite(previous) && (previous - rss) / previous < opt.tol)) {
      model.converged = true;
      break;
    }
    previous = rss;
  }
  return model;
}

ElbowScan select_k_elbow(const Eigen::MatrixXd& X, std::size_t k_max, double threshold,
                         const ArchetypeOptions& base, double explained_floor) {
  if (k_max < 2) throw Error(ErrorCode::InvalidArgument, "elbow scan needs k_max >= 2");
  k_max = std::min<std::size_t>(k_max, static_cast<std::size_t>(X.rows()));
  ElbowScan scan;
  for (std::size_t k = 1; k <= k_max; ++k) {
    ArchetypeOptions opt = base;
    opt.k = k;
    opt.observer = nullptr;
    ArchetypeModel m = fit_archetypes(X, opt);
    scan.candidates.emplace_back(k, m.rss_trace.empty() ? 0.0 : m.rss_trace.back());
  }
  const double total = scan.candidates.front().second;
  const double floor = explained_floor * total;
  scan.chosen_k = scan.candidates.back().first;
  for (std::size_t i = 1; i < scan.candidates.size(); ++i) {
    const double before = scan.candidates[i - 1].second;
    const double after = scan.candidates[i].second;
    const double improvement = before > floor ? (before - after) / before : 0.0;
    if (improvement < threshold) {
      scan.chosen_k = scan.candidates[i - 1].first;
      break;
    }
  }
  return scan;
}

std::vector<std::vector<NearPackage>> nearest_packages(const ArchetypeModel& model,
                                                       const Eigen::MatrixXd& X,
                                                       const std::vector<std::string>& names,
                                                       std::size_t per_archetype) {
  if (names.size() != static_cast<std::size_t>(X.rows())) {
    throw Error(ErrorCode::InvalidArgument, "one name per data row required");
  }
  std::vector<std::vector<NearPackage>> out;
  for (Eigen::Index j = 0; j < model.archetypes.rows(); ++j) {
    std::vector<NearPackage> ranked;
    ranked.reserve(names.size());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      ranked.push_back({names[static_cast<std::size_t>(i)],
                        (X.row(i) - model.archetypes.row(j)).norm()});
    }
    std::sort(ranked.begin(), ranked.end(), [](const NearPackage& a, const NearPackage& b) {
      if (a.distance != b.distance) return a.distance < b.distance;
      return a.name < b.name;
    });
    if (ranked.size() > per_archetype) ranked.resize(per_archetype);
    out.push_back(std::move(ranked));
  }
  return out;
}

std::string export_parallel_coordinates(const ArchetypeModel& model, const DatasetMatrix& data) {
  const Eigen::MatrixXd& X = data.matrix;
  Eigen::RowVectorXd lo = X.colwise().minCoeff();
  Eigen::RowVectorXd hi = X.colwise().maxCoeff();
  auto normalized = [&](Eigen::Index c, double v) {
    double range = hi(c) - lo(c);
    if (range <= 0.0) return 0.0;
    return std::clamp((v - lo(c)) / range, 0.0, 1.0);
  };
  Table t;
  t.header = {"label", "is_archetype"};
  for (const auto& c : data.layout.column_names) t.header.push_back(c);
  auto add_row = [&](const std::string& label, bool archetype, const Eigen::RowVectorXd& values) {
    std::vector<std::string> row = {label, archetype ? "1" : "0"};
    for (Eigen::Index c = 0; c < values.size(); ++c) {
      row.push_back(format_double(normalized(c, values(c))));
    }
    t.rows.push_back(std::move(row));
  };
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    add_row(data.packages[static_cast<std::size_t>(i)], false, X.row(i));
  }
  for (Eigen::Index j = 0; j < model.archetypes.rows(); ++j) {
    add_row("A" + std::to_string(j + 1), true, model.archetypes.row(j));
  }
  return t.to_string();
}

Eigen::MatrixXd simplex_positions(const ArchetypeModel& model) {
  if (model.k != 3) {
    throw Error(ErrorCode::KNotThree,
                "triangle plot needs exactly 3 archetypes; model has " + std::to_string(model.k));
  }
  Eigen::Matrix<double, 3, 2> vertices;
  vertices << 0.0, 0.0, 1.0, 0.0, 0.5, std::sqrt(3.0) / 2.0;
  return model.alpha * vertices;
}

std::string export_simplex(const ArchetypeModel& model, const std::vector<std::string>& names,
                           SimplexMode mode) {
  Table t;
  t.header = {"package"};
  Eigen::MatrixXd values;
  if (mode == SimplexMode::Triangle) {
    values = simplex_positions(model);
    t.header.push_back("x");
    t.header.push_back("y");
  } else {
    values = model.alpha;
    for (std::size_t j = 0; j < model.k; ++j) t.header.push_back("a" + std::to_string(j + 1));
  }
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    std::vector<std::string> row = {names.at(static_cast<std::size_t>(i))};
    for (Eigen::Index c = 0; c < values.cols(); ++c) row.push_back(format_double(values(i, c)));
    t.rows.push_back(std::move(row));
  }
  return t.to_string();
}

std::string export_nearest(const std::vector<std::vector<NearPackage>>& lists) {
  Table t;
  t.header = {"archetype", "rank", "package", "distance"};
  for (std::size_t j = 0; j < lists.size(); ++j) {
    for (std::size_t r = 0; r < lists[j].size(); ++r) {
      t.rows.push_back({"A" + std::to_string(j + 1), std::to_string(r + 1), lists[j][r].name,
                        format_double(lists[j][r].distance)});
    }
  }
  return t.to_string();
}

std::string export_elbow(const ElbowScan& scan) {
  Table t;
  t.header = {"k", "rss", "chosen"};
  for (const auto& [k, rss] : scan.candidates) {
    t.rows.push_back({std::to_string(k), format_double(rss), k == scan.chosen_k ? "1" : "0"});
  }
  return t.to_string();
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != c) {
      throw Error(ErrorCode::MalformedDocument, "ragged matrix in archetype model");
    }
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
  }
  return m;
}

}  // namespace

std::string to_json(const ArchetypeModel& model) {
  nlohmann::json j = nlohmann::json::object();
  j["k"] = model.k;
  j["seed"] = model.seed;
  j["converged"] = model.converged;
  j["archetypes"] = matrix_json(model.archetypes);
  j["alpha"] = matrix_json(model.alpha);
  j["beta"] = matrix_json(model.beta);
  j["rss_trace"] = model.rss_trace;
  return j.dump() + "\n";
}

ArchetypeModel archetypes_from_json(std::string_view text) {
  auto j = nlohmann::json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::MalformedDocument, "archetype model is not a JSON object");
  }
  try {
    ArchetypeModel m;
    m.k = j.at("k").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.converged = j.at("converged").get<bool>();
    m.archetypes = matrix_from_json(j.at("archetypes"));
    m.alpha = matrix_from_json(j.at("alpha"));
    m.beta = matrix_from_json(j.at("beta"));
    m.rss_trace = j.at("rss_trace").get<std::vector<double>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("bad archetype model: ") + e.what());
  }
}

}  // namespace ecotopo
