#include "ecotopo/linalg.hpp"

#include <cmath>

#include "ecotopo/error.hpp"

namespace ecotopo {

Eigenpairs leading_eigenpairs(const Eigen::MatrixXd& symmetric, Eigen::Index count) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidArgument, "eigendecomposition did not converge");
  }
  const Eigen::Index n = symmetric.rows();
  count = std::min(count, n);
  Eigenpairs out;
  out.values.resize(count);
  out.vectors.resize(n, count);
  // Eigen returns ascending order.
  for (Eigen::Index c = 0; c < count; ++c) {
    out.values(c) = solver.eigenvalues()(n - 1 - c);
    out.vectors.col(c) = solver.eigenvectors().col(n - 1 - c);
  }
  canonicalize_signs(out.vectors);
  return out;
}

void canonicalize_signs(Eigen::MatrixXd& columns) {
  for (Eigen::Index c = 0; c < columns.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < columns.rows(); ++r) {
      double mag = std::abs(columns(r, c));
      if (mag > best) {
        best = mag;
        arg = r;
      }
    }
    if (columns.rows() > 0 && columns(arg, c) < 0) columns.col(c) *= -1.0;
  }
}

}  // namespace ecotopo
