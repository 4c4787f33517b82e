#pragma once

#include <Eigen/Dense>

namespace ecotopo {

struct Eigenpairs {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns, unit norm
};

// Leading `count` eigenpairs of a symmetric matrix, ordered by descending
// eigenvalue, each eigenvector flipped so its largest-magnitude entry is
// positive (first such entry on ties).
Eigenpairs leading_eigenpairs(const Eigen::MatrixXd& symmetric, Eigen::Index count);

void canonicalize_signs(Eigen::MatrixXd& columns);

}  // namespace ecotopo
