#pragma once

#include <Eigen/Core>

#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "edgeloc/formulation.hpp"
#include "edgeloc/network.hpp"
#include "edgeloc/solver.hpp"

namespace edgeloc {

// Estimated positions read from the Z position entries. Sensors that
// participate in no edge have no entries and get `missing`.
std::vector<Eigen::Vector2d> extract_positions(
    const SolveResult& result, const FormulationMap& map,
    const Eigen::Vector2d& missing = Eigen::Vector2d::Zero());

// Mean Euclidean distance between estimates and truth.
double position_error(const std::vector<Eigen::Vector2d>& estimate,
                      const std::vector<Eigen::Vector2d>& truth);

// Arithmetic mean of per-network errors. Throws on an empty list.
double average_position_error(const std::vector<double>& deltas);

// Dual PSD block per sensor edge, smat'd from the multiplier rows. Requires
// an Optimal solve; each block lies in the PSD cone by construction.
std::map<std::pair<int, int>, Eigen::MatrixXd> extract_dual_blocks(
    const SolveResult& result, const FormulationMap& map);

// Reassembles -b'lambda from the extracted multipliers and the network data:
// sum of edge multipliers times measured squared distances, the base-row
// terms, minus sum p * trace(S_block). Matches result.dual_objective up to
// rounding; requires an Optimal solve.
double evaluate_dual_objective(const SolveResult& result,
                               const MeasuredNetwork& mn,
                               const FormulationMap& map);

struct NumericalRank {
  int rank = 0;
  Eigen::VectorXd singular_values;
};

// Count of singular values above rel_tol times the largest one.
NumericalRank numerical_rank(const Eigen::MatrixXd& M, double rel_tol = 1e-6);

struct RankRelationRow {
  int i = -1, j = -1;
  int rank_z = 0;  // of Z_block + p I
  int rank_s = 0;
  bool trace_condition_holds = false;          // rank(S) + 4 <= 2q
  bool complementarity_bound_holds = false;    // rank(Z + pI) + rank(S) <= dim
  Eigen::VectorXd z_singular_values;
  Eigen::VectorXd s_singular_values;
};

struct RankRelationReport {
  int q = 2;
  double rel_tol = 1e-6;
  std::vector<RankRelationRow> rows;
  std::string table() const;  // plain-text summary, one row per edge
};

// Tabulates per-edge ranks of matched primal/dual blocks against both the
// trace-based condition (with target rank q) and the complementarity bound.
// Purely a report: no condition is asserted. Blocks whose largest singular
// value is at or below zero_floor are treated as the zero matrix, so solver
// noise around an exactly-zero block does not register as rank. Throws on
// mismatched edge sets.
RankRelationReport rank_relation_report(
    const std::vector<std::pair<std::pair<int, int>, Eigen::MatrixXd>>& z_blocks,
    const std::vector<std::pair<std::pair<int, int>, Eigen::MatrixXd>>& s_blocks,
    int q = 2, double rel_tol = 1e-6, double zero_floor = 0.0);

struct SensitivityReport {
  double p = 0.0;
  double step = 0.0;
  double objective_at_p = 0.0;
  double objective_at_p_plus_step = 0.0;
  double finite_difference = 0.0;   // (obj(p+step) - obj(p)) / step
  double dual_trace_gradient = 0.0; // -sum over blocks of trace(S_block)
  double relative_error = 0.0;
};

// Settings used for sensitivity runs: tolerance 1e-9, generous iterations.
SolveSettings tight_settings();

// Solves the perturbed program at p and p + step with a tight tolerance and
// compares the finite-difference slope of the optimal value against the
// gradient predicted by the dual blocks. Throws if either solve is not
// Optimal.
SensitivityReport sensitivity_check(const MeasuredNetwork& mn, double p,
                                    double step,
                                    const SolveSettings& settings = tight_settings(),
                                    const BuildOptions& opts = {});

struct EdgeBlockData {
  int i = -1, j = -1;
  double p = 0.0;
  Eigen::MatrixXd z_block;  // principal submatrix of Z (without the p shift)
  Eigen::MatrixXd s_block;  // dual block
  double trace_product = 0.0;  // trace((Z + pI) S)
  int rank_z = 0;              // numerical rank of Z + pI
  int rank_s = 0;
};

struct LocalizationReport {
  std::string method;
  SolveStatus status = SolveStatus::MaxIterations;
  std::vector<Eigen::Vector2d> estimated_positions;
  double delta = std::numeric_limits<double>::quiet_NaN();  // NaN if truth unknown
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;
  int iterations = 0;
  double solve_time_seconds = 0.0;
  double formulation_time_seconds = 0.0;
  std::vector<EdgeBlockData> blocks;
  double trace_sum = 0.0;  // sum of trace(S_block)
};

// Assembles the full per-solve report. delta is computed against the true
// sensor positions carried by the network.
LocalizationReport make_report(const SolveResult& result, const FormulationMap& map,
                               const MeasuredNetwork& mn, const std::string& method,
                               double formulation_time_seconds = 0.0,
                               double rank_rel_tol = 1e-6);

void save_report(const LocalizationReport& report, const std::string& path);

}  // namespace edgeloc
