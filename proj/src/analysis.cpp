#include "edgeloc/analysis.hpp"

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "edgeloc/cones.hpp"

namespace edgeloc {

using json = nlohmann::ordered_json;

namespace {

void require_optimal(const SolveResult& result, const char* who) {
  if (result.status != SolveStatus::Optimal)
    throw std::runtime_error(std::string(who) +
                             ": solve status is " + to_string(result.status) +
                             "; rerun with a higher iteration limit");
}

}  // namespace

std::vector<Eigen::Vector2d> extract_positions(const SolveResult& result,
                                               const FormulationMap& map,
                                               const Eigen::Vector2d& missing) {
  if (result.status != SolveStatus::Optimal &&
      result.status != SolveStatus::MaxIterations)
    throw std::invalid_argument("extract_positions: no usable primal point (status " +
                                to_string(result.status) + ")");
  if (result.y.size() != map.n_vars)
    throw std::invalid_argument("extract_positions: result does not match map");

  std::vector<Eigen::Vector2d> out(map.z.n_sensors, missing);
  for (int j = 0; j < map.z.n_sensors; ++j) {
    if (map.z.has_entry(0, 2 + j)) {
      const auto [x1, x2] = map.z.x_slots(j);
      out[j] = {result.y[x1], result.y[x2]};
    }
  }
  return out;
}

double position_error(const std::vector<Eigen::Vector2d>& estimate,
                      const std::vector<Eigen::Vector2d>& truth) {
  if (estimate.size() != truth.size())
    throw std::invalid_argument("position_error: length mismatch");
  if (estimate.empty()) throw std::invalid_argument("position_error: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i)
    sum += (estimate[i] - truth[i]).norm();
  return sum / static_cast<double>(estimate.size());
}

double average_position_error(const std::vector<double>& deltas) {
  if (deltas.empty())
    throw std::invalid_argument("average_position_error: empty list");
  double sum = 0.0;
  for (double d : deltas) sum += d;
  return sum / static_cast<double>(deltas.size());
}

std::map<std::pair<int, int>, Eigen::MatrixXd> extract_dual_blocks(
    const SolveResult& result, const FormulationMap& map) {
  require_optimal(result, "extract_dual_blocks");
  std::map<std::pair<int, int>, Eigen::MatrixXd> out;
  for (const auto& blk : map.psd_blocks) {
    if (blk.i < 0) continue;  // single-sensor blocks are not edge duals
    out[{blk.i, blk.j}] =
        smat(result.lambda.segment(blk.row0, svec_size(blk.dim)));
  }
  return out;
}

double evaluate_dual_objective(const SolveResult& result,
                               const MeasuredNetwork& mn,
                               const FormulationMap& map) {
  require_optimal(result, "evaluate_dual_objective");
  if (result.lambda.size() <= map.nonneg_row0)
    throw std::invalid_argument("evaluate_dual_objective: result does not match map");

  // edge multipliers against measured squared distances
  double value = 0.0;
  for (std::size_t e = 0; e < mn.base.sensor_edges.size(); ++e) {
    const double omega = -result.lambda[map.sensor_row(e)];
    value += omega * mn.sensor_measured[e] * mn.sensor_measured[e];
  }
  for (std::size_t e = 0; e < mn.base.anchor_edges.size(); ++e) {
    const double omega = -result.lambda[map.anchor_row(e)];
    value += omega * mn.anchor_measured[e] * mn.anchor_measured[e];
  }
  // base rows pin Z00 = 1, Z01 = 0, Z11 = 1
  value += -result.lambda[0] * 1.0 - result.lambda[1] * 0.0 - result.lambda[2] * 1.0;
  // perturbation term: - sum p * trace(S_block)
  for (const auto& blk : map.psd_blocks) {
    if (blk.p == 0.0) continue;
    const Eigen::MatrixXd S =
        smat(result.lambda.segment(blk.row0, svec_size(blk.dim)));
    value -= blk.p * S.trace();
  }
  return value;
}

NumericalRank numerical_rank(const Eigen::MatrixXd& M, double rel_tol) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0))
    throw std::invalid_argument("numerical_rank: rel_tol must be in (0, 1)");
  if (!M.allFinite())
    throw std::invalid_argument("numerical_rank: matrix has NaN or Inf entries");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  NumericalRank out;
  out.singular_values = svd.singularValues();
  if (out.singular_values.size() == 0) return out;
  const double cutoff = rel_tol * out.singular_values[0];
  for (Eigen::Index t = 0; t < out.singular_values.size(); ++t)
    if (out.singular_values[t] > cutoff) ++out.rank;
  return out;
}

std::string RankRelationReport::table() const {
  std::ostringstream os;
  os << "edge        rank(Z+pI)  rank(S)  rank(S)+4<=2q (q=" << q
     << ")  rank(Z+pI)+rank(S)<=dim\n";
  for (const auto& row : rows) {
    std::ostringstream edge;
    edge << "(" << row.i << "," << row.j << ")";
    os << edge.str();
    for (std::size_t t = edge.str().size(); t < 12; ++t) os << ' ';
    os << row.rank_z << "           " << row.rank_s << "        "
       << (row.trace_condition_holds ? "yes" : "NO ") << "                  "
       << (row.complementarity_bound_holds ? "yes" : "NO") << "\n";
  }
  return os.str();
}

RankRelationReport rank_relation_report(
    const std::vector<std::pair<std::pair<int, int>, Eigen::MatrixXd>>& z_blocks,
    const std::vector<std::pair<std::pair<int, int>, Eigen::MatrixXd>>& s_blocks,
    int q, double rel_tol, double zero_floor) {
  if (z_blocks.size() != s_blocks.size())
    throw std::invalid_argument("rank_relation_report: mismatched edge sets");

  RankRelationReport report;
  report.q = q;
  report.rel_tol = rel_tol;
  for (std::size_t t = 0; t < z_blocks.size(); ++t) {
    if (z_blocks[t].first != s_blocks[t].first)
      throw std::invalid_argument("rank_relation_report: mismatched edge sets");
    RankRelationRow row;
    row.i = z_blocks[t].first.first;
    row.j = z_blocks[t].first.second;
    auto rank_of = [&](const Eigen::MatrixXd& M, Eigen::VectorXd& sv) {
      NumericalRank nr = numerical_rank(M, rel_tol);
      sv = nr.singular_values;
      if (sv.size() > 0 && sv[0] <= zero_floor) return 0;
      return nr.rank;
    };
    row.rank_z = rank_of(z_blocks[t].second, row.z_singular_values);
    row.rank_s = rank_of(s_blocks[t].second, row.s_singular_values);
    row.trace_condition_holds = (row.rank_s + 4 <= 2 * q);
    const int dim = static_cast<int>(z_blocks[t].second.rows());
    row.complementarity_bound_holds = (row.rank_z + row.rank_s <= dim);
    report.rows.push_back(std::move(row));
  }
  return report;
}

SolveSettings tight_settings() {
  SolveSettings settings;
  settings.tolerance = 1e-9;
  settings.max_iterations = 400000;
  return settings;
}

SensitivityReport sensitivity_check(const MeasuredNetwork& mn, double p,
                                    double step, const SolveSettings& settings,
                                    const BuildOptions& opts) {
  if (!(step >= 1e-5 && step <= 1e-2))
    throw std::invalid_argument("sensitivity_check: step must be in [1e-5, 1e-2]");
  if (mn.base.num_sensors() > 10)
    throw std::invalid_argument(
        "sensitivity_check: needs a small instance (<= 10 sensors) to solve "
        "tightly");

  auto [prog0, map0] = build_pesdp(mn, p, opts);
  const SolveResult at_p = solve(prog0, settings);
  require_optimal(at_p, "sensitivity_check (at p)");

  auto [prog1, map1] = build_pesdp(mn, p + step, opts);
  const SolveResult at_p_step = solve(prog1, settings);
  require_optimal(at_p_step, "sensitivity_check (at p + step)");

  SensitivityReport report;
  report.p = p;
  report.step = step;
  report.objective_at_p = at_p.primal_objective;
  report.objective_at_p_plus_step = at_p_step.primal_objective;
  report.finite_difference =
      (at_p_step.primal_objective - at_p.primal_objective) / step;
  double trace_sum = 0.0;
  for (const auto& blk : map0.psd_blocks) {
    const Eigen::MatrixXd S = smat(at_p.lambda.segment(blk.row0, svec_size(blk.dim)));
    trace_sum += S.trace();
  }
  report.dual_trace_gradient = -trace_sum;
  report.relative_error =
      std::abs(report.finite_difference - report.dual_trace_gradient) /
      (1.0 + std::abs(report.dual_trace_gradient));
  return report;
}

LocalizationReport make_report(const SolveResult& result, const FormulationMap& map,
                               const MeasuredNetwork& mn, const std::string& method,
                               double formulation_time_seconds, double rank_rel_tol) {
  LocalizationReport report;
  report.method = method;
  report.status = result.status;
  report.primal_objective = result.primal_objective;
  report.dual_objective = result.dual_objective;
  report.gap = result.gap;
  report.iterations = result.iterations;
  report.solve_time_seconds = result.wall_time_seconds;
  report.formulation_time_seconds = formulation_time_seconds;

  if (result.status == SolveStatus::Optimal ||
      result.status == SolveStatus::MaxIterations) {
    report.estimated_positions =
        extract_positions(result, map, mn.base.region.center());
    report.delta = position_error(report.estimated_positions, mn.base.sensors);

    for (const auto& blk : map.psd_blocks) {
      if (blk.i < 0) continue;
      EdgeBlockData data;
      data.i = blk.i;
      data.j = blk.j;
      data.p = blk.p;
      data.z_block = map.z_block(result.y, blk);
      data.s_block = smat(result.lambda.segment(blk.row0, svec_size(blk.dim)));
      const Eigen::MatrixXd shifted =
          data.z_block + blk.p * Eigen::MatrixXd::Identity(blk.dim, blk.dim);
      data.trace_product = (shifted * data.s_block).trace();
      data.rank_z = numerical_rank(shifted, rank_rel_tol).rank;
      data.rank_s = numerical_rank(data.s_block, rank_rel_tol).rank;
      report.trace_sum += data.s_block.trace();
      report.blocks.push_back(std::move(data));
    }
  }
  return report;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

void save_report(const LocalizationReport& report, const std::string& path) {
  json j;
  j["method"] = report.method;
  j["status"] = to_string(report.status);
  json pos = json::array();
  for (const auto& p : report.estimated_positions)
    pos.push_back(json::array({p.x(), p.y()}));
  j["estimated_positions"] = pos;
  if (std::isfinite(report.delta)) j["delta"] = report.delta;
  j["primal_objective"] = report.primal_objective;
  j["dual_objective"] = report.dual_objective;
  j["gap"] = report.gap;
  j["iterations"] = report.iterations;
  j["solve_time_seconds"] = report.solve_time_seconds;
  j["formulation_time_seconds"] = report.formulation_time_seconds;
  j["trace_sum"] = report.trace_sum;
  json blocks = json::array();
  for (const auto& blk : report.blocks) {
    json b;
    b["edge"] = sensor_edge_key(blk.i, blk.j);
    b["p"] = blk.p;
    b["z_block"] = matrix_to_json(blk.z_block);
    b["s_block"] = matrix_to_json(blk.s_block);
    b["trace_product"] = blk.trace_product;
    b["rank_z"] = blk.rank_z;
    b["rank_s"] = blk.rank_s;
    blocks.push_back(b);
  }
  j["edge_blocks"] = blocks;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace edgeloc
