#pragma once

#include <Eigen/Core>

#include "edgeloc/conic.hpp"

namespace edgeloc {

// svec slot of entry (r, c), r <= c, within a block: column-major upper triangle.
constexpr Eigen::Index svec_slot(Eigen::Index r, Eigen::Index c) {
  return c * (c + 1) / 2 + r;
}

// Isometric vectorization: column-stacked upper triangle with off-diagonal
// entries scaled by sqrt(2), so svec(A).dot(svec(B)) == trace(A*B).
// Input is symmetrized on entry; asymmetry beyond sym_tol throws.
Eigen::VectorXd svec(const Eigen::MatrixXd& M, double sym_tol = 1e-12);

// Inverse of svec. Throws if the length is not a triangular number.
Eigen::MatrixXd smat(const Eigen::VectorXd& v);

// Nearest PSD matrix in Frobenius norm: eigendecomposition with negative
// eigenvalues clipped to zero. Throws on NaN input.
Eigen::MatrixXd project_psd(const Eigen::MatrixXd& M);

// Euclidean projection onto the cone product: zero rows to 0, nonnegative
// rows to max(., 0), PSD blocks through project_psd. Throws on length mismatch.
Eigen::VectorXd project_cones(const Eigen::VectorXd& s, const ConeLayout& cones);
void project_cones_inplace(Eigen::VectorXd& s, const ConeLayout& cones);

}  // namespace edgeloc
