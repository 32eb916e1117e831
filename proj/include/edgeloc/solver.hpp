#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>

#include "edgeloc/conic.hpp"

namespace edgeloc {

struct SolveSettings {
  double tolerance = 1e-6;        // target for primal/dual residuals and gap
  int max_iterations = 100000;
  double over_relaxation = 1.6;   // in (1, 2)
  double rho = 1.0;               // penalty on the affine step
  double sigma = 1e-6;            // proximal regularization on y
  bool equilibrate = true;        // Ruiz row/column scaling, undone on report
  bool adaptive_rho = false;      // residual-balancing updates (refactorizes)
  std::optional<double> time_limit_seconds;

  void validate() const;  // throws std::invalid_argument
};

enum class SolveStatus { Optimal, MaxIterations, TimeLimit, InfeasibleSuspected };

std::string to_string(SolveStatus status);

struct SolveResult {
  SolveStatus status = SolveStatus::MaxIterations;
  Eigen::VectorXd y;       // primal decision vector
  Eigen::VectorXd s;       // cone slack (exactly in the cone product)
  Eigen::VectorXd lambda;  // dual multiplier per row (exactly in the dual cone)
  double primal_objective = 0.0;  // c'y
  double dual_objective = 0.0;    // -b'lambda
  double primal_residual = 0.0;   // |Ay + s - b| / (1 + |b|)
  double dual_residual = 0.0;     // |A'lambda + c| / (1 + |c|)
  double gap = 0.0;               // |c'y + b'lambda| / (1 + |c'y| + |b'lambda|)
  int iterations = 0;
  double wall_time_seconds = 0.0;
};

// Operator-splitting solve: alternates projection onto {(y,s): Ay + s = b}
// through a cached sparse LDL' factorization of the quasi-definite system
// [[sigma I, A'], [A, -I/rho]] with cone projection of s under
// over-relaxation; the dual update is the Moreau complement, so the returned
// multipliers lie in the dual cone and are orthogonal to s by construction.
// Deterministic for fixed inputs and settings.
//
// Throws std::runtime_error on factorization failure (suggesting
// equilibration) and on NaN divergence (reporting the iteration).
SolveResult solve(const ConicProgram& prog, const SolveSettings& settings = {});

}  // namespace edgeloc
