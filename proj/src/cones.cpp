#include "edgeloc/cones.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace edgeloc {

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

void ConicProgram::validate() const {
  if (b.size() != A.rows())
    throw std::runtime_error("conic program: b length != rows of A");
  if (c.size() != A.cols())
    throw std::runtime_error("conic program: c length != cols of A");
  if (cones.rows() != A.rows())
    throw std::runtime_error("conic program: cone rows do not sum to rows of A");
  for (int dim : cones.psd)
    if (dim < 1) throw std::runtime_error("conic program: PSD block dim must be >= 1");
}

Eigen::VectorXd svec(const Eigen::MatrixXd& M, double sym_tol) {
  const Eigen::Index k = M.rows();
  if (M.cols() != k) throw std::invalid_argument("svec: matrix must be square");
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > sym_tol)
    throw std::invalid_argument("svec: matrix is not symmetric");
  const Eigen::MatrixXd S = 0.5 * (M + M.transpose());
  Eigen::VectorXd v(svec_size(k));
  for (Eigen::Index c = 0, t = 0; c < k; ++c)
    for (Eigen::Index r = 0; r <= c; ++r, ++t)
      v[t] = (r == c) ? S(r, c) : kSqrt2 * S(r, c);
  return v;
}

Eigen::MatrixXd smat(const Eigen::VectorXd& v) {
  const Eigen::Index len = v.size();
  const Eigen::Index k =
      static_cast<Eigen::Index>((std::sqrt(8.0 * static_cast<double>(len) + 1.0) - 1.0) / 2.0 + 0.5);
  if (svec_size(k) != len)
    throw std::invalid_argument("smat: length is not a triangular number");
  Eigen::MatrixXd M(k, k);
  for (Eigen::Index c = 0, t = 0; c < k; ++c) {
    for (Eigen::Index r = 0; r <= c; ++r, ++t) {
      const double val = (r == c) ? v[t] : v[t] / kSqrt2;
      M(r, c) = val;
      M(c, r) = val;
    }
  }
  return M;
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols())
    throw std::invalid_argument("project_psd: matrix must be square");
  if (!M.allFinite())
    throw std::invalid_argument("project_psd: matrix has NaN or Inf entries");
  const Eigen::MatrixXd S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("project_psd: eigendecomposition failed");
  const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
}

namespace {

// allocation-free projection for the small blocks the formulation emits
template <int N>
void project_psd_segment(Eigen::Ref<Eigen::VectorXd> seg) {
  Eigen::Matrix<double, N, N> M;
  int t = 0;
  for (int c = 0; c < N; ++c) {
    for (int r = 0; r <= c; ++r, ++t) {
      const double val = (r == c) ? seg[t] : seg[t] / kSqrt2;
      M(r, c) = val;
      M(c, r) = val;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> eig(M);
  const Eigen::Matrix<double, N, 1> clipped = eig.eigenvalues().cwiseMax(0.0);
  M.noalias() = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  t = 0;
  for (int c = 0; c < N; ++c)
    for (int r = 0; r <= c; ++r, ++t) seg[t] = (r == c) ? M(r, c) : kSqrt2 * M(r, c);
}

}  // namespace

void project_cones_inplace(Eigen::VectorXd& s, const ConeLayout& cones) {
  if (s.size() != cones.rows())
    throw std::invalid_argument("project_cones: slack length does not match cones");
  if (!s.allFinite())
    throw std::invalid_argument("project_cones: slack has NaN or Inf entries");
  s.head(cones.zero).setZero();
  s.segment(cones.zero, cones.nonneg) =
      s.segment(cones.zero, cones.nonneg).cwiseMax(0.0);
  Eigen::Index r = cones.zero + cones.nonneg;
  for (int dim : cones.psd) {
    const Eigen::Index len = svec_size(dim);
    switch (dim) {
      case 2: project_psd_segment<2>(s.segment(r, len)); break;
      case 3: project_psd_segment<3>(s.segment(r, len)); break;
      case 4: project_psd_segment<4>(s.segment(r, len)); break;
      default:
        s.segment(r, len) = svec(project_psd(smat(s.segment(r, len))), 1e-9);
    }
    r += len;
  }
}

Eigen::VectorXd project_cones(const Eigen::VectorXd& s, const ConeLayout& cones) {
  Eigen::VectorXd out = s;
  project_cones_inplace(out, cones);
  return out;
}

}  // namespace edgeloc
