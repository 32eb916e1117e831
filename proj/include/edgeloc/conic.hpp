#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <vector>

namespace edgeloc {

constexpr Eigen::Index svec_size(Eigen::Index dim) { return dim * (dim + 1) / 2; }

// Ordered cone product: zero-cone rows (equalities), then nonnegative rows,
// then svec'd PSD blocks. A PSD block of dimension k spans k(k+1)/2 rows.
struct ConeLayout {
  Eigen::Index zero = 0;
  Eigen::Index nonneg = 0;
  std::vector<int> psd;

  Eigen::Index psd_rows() const {
    Eigen::Index r = 0;
    for (int dim : psd) r += svec_size(dim);
    return r;
  }
  Eigen::Index rows() const { return zero + nonneg + psd_rows(); }
  Eigen::Index psd_start(std::size_t block) const {
    Eigen::Index r = zero + nonneg;
    for (std::size_t t = 0; t < block; ++t) r += svec_size(psd[t]);
    return r;
  }
  bool operator==(const ConeLayout&) const = default;
};

// Standard-form conic instance:  min c'y  s.t.  A y + s = b,  s in cones.
struct ConicProgram {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  ConeLayout cones;

  Eigen::Index rows() const { return A.rows(); }
  Eigen::Index cols() const { return A.cols(); }

  // Throws std::runtime_error if cone rows do not match A/b or c is misshapen.
  void validate() const;
};

}  // namespace edgeloc
