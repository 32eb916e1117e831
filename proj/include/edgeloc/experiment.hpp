#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "edgeloc/formulation.hpp"
#include "edgeloc/network.hpp"
#include "edgeloc/solver.hpp"

namespace edgeloc {

// Sweep configuration. With size_grid unset, cells are the noise levels in
// sigma_grid at fixed sensor count; with size_grid set, cells are sensor
// counts at fixed noise size_sigma. Both methods in a cell see the same
// networks and the same noise realizations (paired comparison).
struct ExperimentConfig {
  std::vector<std::string> methods = {"esdp", "pesdp"};
  int sensors = 40;
  int anchors = 5;
  double radio_range = 0.3;
  int max_neighbors = 5;
  std::vector<double> sigma_grid = {0.0, 0.05, 0.1, 0.2};
  std::optional<std::vector<int>> size_grid;
  double size_sigma = 0.1;
  int networks_per_cell = 10;  // L
  double p = 0.1;
  std::uint64_t base_seed = 12u;
  bool symmetric_anchors = true;  // fixed corners+center anchor pattern
  bool single_sensor_blocks = false;
  SolveSettings solver = sweep_solver_defaults();

  static SolveSettings sweep_solver_defaults() {
    SolveSettings settings;
    settings.max_iterations = 40000;
    return settings;
  }

  void validate() const;
  std::uint64_t config_hash() const;  // over the canonical serialization

  static ExperimentConfig desk_scale() { return {}; }
  static ExperimentConfig full_scale();  // 300 sensors, 50 networks per cell

  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

struct SweepRow {
  std::string run_id;
  std::string method;
  int n = 0, m = 0;
  double r = 0.0, sigma = 0.0, p = 0.0;
  std::uint64_t net_seed = 0, noise_seed = 0;
  std::string status;
  double objective = 0.0, dual_objective = 0.0, gap = 0.0;
  int iterations = 0;
  double formulation_time_s = 0.0, solve_time_s = 0.0;
  double delta = 0.0;
};

// Runs the full (method x cell x network) grid in deterministic order.
// Seeds derive from (base_seed, cell, network index) only, so methods are
// paired. Non-optimal solves are recorded with their status, never dropped.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config,
                                std::ostream* progress = nullptr);

// Fixed column order:
// run_id,method,n,m,r,sigma,p,net_seed,noise_seed,status,objective,
// dual_objective,gap,iterations,formulation_time_s,solve_time_s,delta
void write_results_csv(const std::vector<SweepRow>& rows, std::ostream& os);
void write_results_csv(const std::vector<SweepRow>& rows, const std::string& path);
std::vector<SweepRow> read_results_csv(std::istream& is);
std::vector<SweepRow> read_results_csv_file(const std::string& path);

struct SummaryRow {
  std::string method;
  double cell = 0.0;  // sigma for noise sweeps, sensor count for size sweeps
  double mean_pe = 0.0;
  double std_pe = 0.0;
  double mean_solve_time_s = 0.0;
  int count = 0;
};

// Aggregates rows into mean position error and mean solve time per
// (method, cell). The cell axis is the sensor count when it varies,
// otherwise the noise level.
std::vector<SummaryRow> summarize(const std::vector<SweepRow>& rows);

void write_summary_csv(const std::vector<SummaryRow>& summary, std::ostream& os);
void write_summary_csv(const std::vector<SummaryRow>& summary,
                       const std::string& path);

// Wide per-cell table with one mean-PE and one mean-time column per method,
// ready for external plotting tools.
void write_plot_data(const std::vector<SummaryRow>& summary, std::ostream& os);
void write_plot_data(const std::vector<SummaryRow>& summary, const std::string& path);

}  // namespace edgeloc
