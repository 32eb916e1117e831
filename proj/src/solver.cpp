#include "edgeloc/solver.hpp"

#include <Eigen/SparseCholesky>

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "edgeloc/cones.hpp"

namespace edgeloc {

void SolveSettings::validate() const {
  if (!(tolerance > 0.0))
    throw std::invalid_argument("solve settings: tolerance must be > 0");
  if (max_iterations < 1)
    throw std::invalid_argument("solve settings: max_iterations must be >= 1");
  if (!(over_relaxation > 1.0 && over_relaxation < 2.0))
    throw std::invalid_argument("solve settings: over_relaxation must be in (1, 2)");
  if (!(rho > 0.0)) throw std::invalid_argument("solve settings: rho must be > 0");
  if (!(sigma >= 0.0)) throw std::invalid_argument("solve settings: sigma must be >= 0");
  if (time_limit_seconds && !(*time_limit_seconds > 0.0))
    throw std::invalid_argument("solve settings: time limit must be > 0");
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::MaxIterations: return "MaxIterations";
    case SolveStatus::TimeLimit: return "TimeLimit";
    case SolveStatus::InfeasibleSuspected: return "InfeasibleSuspected";
  }
  return "Unknown";
}

namespace {

// Ruiz equilibration. Rows belonging to one PSD block share a single scale so
// the scaled slack is still the svec of a symmetric matrix.
void ruiz_equilibrate(Eigen::SparseMatrix<double>& A, const ConeLayout& cones,
                      Eigen::VectorXd& d, Eigen::VectorXd& e) {
  const Eigen::Index m = A.rows(), n = A.cols();
  d = Eigen::VectorXd::Ones(m);
  e = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd row_max(m), col_max(n), dr(m), ec(n);

  for (int pass = 0; pass < 10; ++pass) {
    row_max.setZero();
    col_max.setZero();
    for (Eigen::Index col = 0; col < A.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it) {
        const double a = std::abs(it.value());
        row_max[it.row()] = std::max(row_max[it.row()], a);
        col_max[col] = std::max(col_max[col], a);
      }
    }
    // uniform scale across each PSD block
    Eigen::Index r = cones.zero + cones.nonneg;
    for (int dim : cones.psd) {
      const Eigen::Index len = svec_size(dim);
      const double blk = row_max.segment(r, len).maxCoeff();
      row_max.segment(r, len).setConstant(blk);
      r += len;
    }
    for (Eigen::Index i = 0; i < m; ++i)
      dr[i] = row_max[i] > 0.0 ? 1.0 / std::sqrt(row_max[i]) : 1.0;
    for (Eigen::Index j = 0; j < n; ++j)
      ec[j] = col_max[j] > 0.0 ? 1.0 / std::sqrt(col_max[j]) : 1.0;

    for (Eigen::Index col = 0; col < A.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it)
        it.valueRef() *= dr[it.row()] * ec[col];
    d.array() *= dr.array();
    e.array() *= ec.array();
  }
}

using Ldlt = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>;

// [[sigma I, A'], [A, -I/rho]], lower triangle only
Eigen::SparseMatrix<double> kkt_matrix(const Eigen::SparseMatrix<double>& A,
                                       double sigma, double rho) {
  const Eigen::Index m = A.rows(), n = A.cols();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(A.nonZeros()) + m + n);
  for (Eigen::Index j = 0; j < n; ++j) trip.emplace_back(j, j, sigma);
  for (Eigen::Index col = 0; col < A.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it)
      trip.emplace_back(n + it.row(), col, it.value());
  for (Eigen::Index i = 0; i < m; ++i) trip.emplace_back(n + i, n + i, -1.0 / rho);
  Eigen::SparseMatrix<double> kkt(n + m, n + m);
  kkt.setFromTriplets(trip.begin(), trip.end());
  return kkt;
}

void factorize(Ldlt& ldlt, const Eigen::SparseMatrix<double>& kkt, bool analyzed) {
  if (!analyzed) ldlt.analyzePattern(kkt);
  ldlt.factorize(kkt);
  if (ldlt.info() != Eigen::Success || !ldlt.vectorD().allFinite() ||
      ldlt.vectorD().cwiseAbs().minCoeff() <= 0.0)
    throw std::runtime_error(
        "solve: KKT factorization failed (structurally rank-deficient system); "
        "try enabling equilibration or increasing sigma/rho");
}

}  // namespace

SolveResult solve(const ConicProgram& prog, const SolveSettings& settings) {
  settings.validate();
  prog.validate();

  const auto t_start = std::chrono::steady_clock::now();
  const Eigen::Index m = prog.rows(), n = prog.cols();

  // scaled copy of the data; d, e are identities when equilibration is off
  Eigen::SparseMatrix<double> A = prog.A;
  Eigen::VectorXd d = Eigen::VectorXd::Ones(m);
  Eigen::VectorXd e = Eigen::VectorXd::Ones(n);
  if (settings.equilibrate) ruiz_equilibrate(A, prog.cones, d, e);
  const Eigen::VectorXd b = d.asDiagonal() * prog.b;
  const Eigen::VectorXd c = e.asDiagonal() * prog.c;
  const double b_norm = prog.b.norm(), c_norm = prog.c.norm();

  double rho = settings.rho;
  const double sigma = settings.sigma;
  const double alpha = settings.over_relaxation;

  Ldlt ldlt;
  factorize(ldlt, kkt_matrix(A, sigma, rho), false);

  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);

  Eigen::VectorXd rhs(n + m), sol(n + m), Ay(m), t(m), v(m), lam(m);
  Eigen::VectorXd rp_vec(m), rd_vec(n);

  SolveResult result;
  result.status = SolveStatus::MaxIterations;

  // infeasible problems show a stalling primal residual with a diverging
  // dual iterate; compared window to window, three strikes in a row
  constexpr int kWindow = 2000;
  double window_rp = std::numeric_limits<double>::infinity();
  double window_wnorm = 0.0;
  int stalled_windows = 0;
  int iter = 0;
  for (; iter < settings.max_iterations; ++iter) {
    rhs.head(n) = sigma * y - c;
    rhs.tail(m) = b - s - w;
    sol = ldlt.solve(rhs);
    y = sol.head(n);
    // A y falls out of the KKT solve: A y = b - s - w + v / rho
    Ay = b - s - w + sol.tail(m) / rho;

    t = alpha * Ay + (1.0 - alpha) * (b - s);
    v = b - t - w;
    if (!v.allFinite())
      throw std::runtime_error("solve: diverged (NaN) at iteration " +
                               std::to_string(iter + 1));
    s = v;
    project_cones_inplace(s, prog.cones);
    w = s - v;  // Moreau complement: in the dual cone, orthogonal to s

    lam = rho * w;
    rp_vec = (Ay + s - b).cwiseQuotient(d);
    rd_vec.noalias() = A.transpose() * lam;
    rd_vec = (rd_vec + c).cwiseQuotient(e);

    const double pobj = c.dot(y);
    const double dobj = -b.dot(lam);
    const double rp = rp_vec.norm() / (1.0 + b_norm);
    const double rd = rd_vec.norm() / (1.0 + c_norm);
    const double gap =
        std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

    if (!std::isfinite(rp) || !std::isfinite(rd) || !std::isfinite(pobj))
      throw std::runtime_error("solve: diverged (NaN) at iteration " +
                               std::to_string(iter + 1));

    result.primal_objective = pobj;
    result.dual_objective = dobj;
    result.primal_residual = rp;
    result.dual_residual = rd;
    result.gap = gap;

    if (rp <= settings.tolerance && rd <= settings.tolerance &&
        gap <= settings.tolerance) {
      result.status = SolveStatus::Optimal;
      ++iter;
      break;
    }

    if ((iter + 1) % kWindow == 0) {
      const double wnorm = w.norm();
      const bool stalled = rp > 0.999 * window_rp && wnorm > 1.02 * window_wnorm &&
                           rp > 100.0 * settings.tolerance;
      stalled_windows = stalled ? stalled_windows + 1 : 0;
      if (stalled_windows >= 3) {
        result.status = SolveStatus::InfeasibleSuspected;
        ++iter;
        break;
      }
      window_rp = rp;
      window_wnorm = std::max(wnorm, 1e-12);
    }

    if (settings.adaptive_rho && (iter + 1) % 200 == 0 && rd > 0.0 && rp > 0.0) {
      double factor = 1.0;
      if (rp > 10.0 * rd) factor = 2.0;
      else if (rd > 10.0 * rp) factor = 0.5;
      if (factor != 1.0) {
        rho *= factor;
        w /= factor;  // keep lambda = rho * w continuous
        factorize(ldlt, kkt_matrix(A, sigma, rho), true);
      }
    }

    if (settings.time_limit_seconds && (iter % 50 == 0)) {
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
              .count();
      if (elapsed > *settings.time_limit_seconds) {
        result.status = SolveStatus::TimeLimit;
        ++iter;
        break;
      }
    }
  }

  // undo the scaling: y = E yhat, s = D^{-1} shat, lambda = D lamhat
  result.y = e.asDiagonal() * y;
  result.s = s.cwiseQuotient(d);
  result.lambda = d.asDiagonal() * lam;
  result.iterations = iter;
  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return result;
}

}  // namespace edgeloc
