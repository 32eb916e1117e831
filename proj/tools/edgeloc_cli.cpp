#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include "edgeloc/analysis.hpp"
#include "edgeloc/experiment.hpp"
#include "edgeloc/formulation.hpp"
#include "edgeloc/network.hpp"
#include "edgeloc/sdpa.hpp"
#include "edgeloc/solver.hpp"

namespace {

using namespace edgeloc;

int cmd_generate(int sensors, int anchors, double radio, int max_neighbors,
                 std::uint64_t seed, bool symmetric_anchors,
                 const std::string& out) {
  const Network net = generate_network(sensors, anchors, radio, max_neighbors,
                                       seed, {}, symmetric_anchors);
  save_network(net, out);
  std::cout << "wrote " << out << ": " << net.num_sensors() << " sensors, "
            << net.num_anchors() << " anchors, " << net.sensor_edges.size()
            << " sensor edges, " << net.anchor_edges.size() << " anchor edges\n";
  return 0;
}

int cmd_solve(const std::string& net_path, const std::string& method, double p,
              std::optional<double> sigma, std::optional<std::uint64_t> noise_seed,
              const SolveSettings& settings, bool single_sensor_blocks,
              const std::string& out, const std::string& sdpa_path,
              const std::string& meta_path) {
  auto instance = load_instance(net_path);
  MeasuredNetwork mn;
  if (auto* plain = std::get_if<Network>(&instance)) {
    mn = apply_noise(*plain, sigma.value_or(0.0), noise_seed.value_or(0));
  } else {
    if (sigma || noise_seed)
      throw std::runtime_error(
          "--sigma/--noise-seed apply to plain network files; this file already "
          "carries measurements");
    mn = std::get<MeasuredNetwork>(std::move(instance));
  }

  BuildOptions opts;
  opts.single_sensor_blocks = single_sensor_blocks;
  const auto t0 = std::chrono::steady_clock::now();
  BuiltProgram built =
      method == "pesdp" ? build_pesdp(mn, p, opts) : build_esdp(mn, opts);
  const double formulation_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (built.map.no_anchor_edges)
    std::cerr << "warning: no anchor edges; positions have translational "
                 "gauge freedom\n";
  if (!sdpa_path.empty()) write_sdpa(built.program, sdpa_path);
  if (!meta_path.empty()) {
    // decision-vector slots of each sensor's position entries plus the truth,
    // for tools that re-solve the exported program
    std::ofstream meta(meta_path);
    if (!meta) throw std::runtime_error("cannot open for writing: " + meta_path);
    for (int j = 0; j < mn.base.num_sensors(); ++j) {
      int x1 = -1, x2 = -1;
      if (built.map.z.has_entry(0, 2 + j)) {
        std::tie(x1, x2) = built.map.z.x_slots(j);
      }
      meta << x1 << " " << x2 << " " << mn.base.sensors[j].x() << " "
           << mn.base.sensors[j].y() << "\n";
    }
  }

  const SolveResult result = solve(built.program, settings);
  const LocalizationReport report =
      make_report(result, built.map, mn, method, formulation_time);
  if (!out.empty()) save_report(report, out);

  std::cout << "status=" << to_string(result.status)
            << " objective=" << result.primal_objective
            << " dual=" << result.dual_objective << " gap=" << result.gap
            << " iterations=" << result.iterations
            << " solve_time_s=" << result.wall_time_seconds;
  if (std::isfinite(report.delta)) std::cout << " delta=" << report.delta;
  std::cout << "\n";
  return result.status == SolveStatus::Optimal ? 0 : 2;
}

int cmd_sweep(const std::string& config_path, bool full_scale,
              const std::string& out) {
  ExperimentConfig config;
  if (!config_path.empty()) config = ExperimentConfig::from_json_file(config_path);
  if (full_scale) {
    const ExperimentConfig full = ExperimentConfig::full_scale();
    config.sensors = full.sensors;
    config.anchors = full.anchors;
    config.radio_range = full.radio_range;
    config.networks_per_cell = full.networks_per_cell;
  }
  const auto rows = run_sweep(config, &std::cerr);
  write_results_csv(rows, out);
  std::cout << "wrote " << out << " (" << rows.size() << " rows)\n";
  return 0;
}

int cmd_report(const std::string& in, const std::string& out,
               const std::string& plot_data) {
  const auto rows = read_results_csv_file(in);
  const auto summary = summarize(rows);
  write_summary_csv(summary, out);
  if (!plot_data.empty()) write_plot_data(summary, plot_data);
  std::cout << "wrote " << out;
  if (!plot_data.empty()) std::cout << " and " << plot_data;
  std::cout << " (" << summary.size() << " cells)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge-based SDP localization for 2-D sensor networks"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a random network file");
  int sensors = 40, anchors = 5, max_neighbors = 5;
  double radio = 0.3;
  std::uint64_t seed = 0;
  bool symmetric_anchors = false;
  std::string gen_out = "network.json";
  gen->add_option("--sensors", sensors, "Number of sensors")->required();
  gen->add_option("--anchors", anchors, "Number of anchors")->required();
  gen->add_option("--radio", radio, "Radio range")->required();
  gen->add_option("--max-neighbors", max_neighbors, "Sensor neighbor cap");
  gen->add_option("--seed", seed, "RNG seed");
  gen->add_flag("--symmetric-anchors", symmetric_anchors,
                "Place anchors on the fixed corners+center pattern");
  gen->add_option("--out", gen_out, "Output path")->required();

  // solve
  auto* slv = app.add_subcommand("solve", "Solve one network with one method");
  std::string net_path, method = "esdp", solve_out, sdpa_path;
  double p = 0.1;
  std::optional<double> sigma;
  std::optional<std::uint64_t> noise_seed;
  SolveSettings settings;
  bool single_sensor_blocks = false;
  slv->add_option("--net", net_path, "Network JSON file")->required();
  slv->add_option("--method", method, "Relaxation")
      ->check(CLI::IsMember({"esdp", "pesdp"}));
  slv->add_option("--p", p, "Perturbation value for pesdp");
  slv->add_option("--sigma", sigma, "Noise std applied to a plain network file");
  slv->add_option("--noise-seed", noise_seed, "Noise seed for --sigma");
  slv->add_option("--tol", settings.tolerance, "Solver tolerance");
  slv->add_option("--max-iter", settings.max_iterations, "Iteration cap");
  slv->add_flag("--single-sensor-blocks", single_sensor_blocks,
                "Add 3x3 blocks for sensors with anchor edges only");
  slv->add_option("--out", solve_out, "Localization report JSON path");
  slv->add_option("--sdpa", sdpa_path, "Also export the program in SDPA format");
  std::string meta_path;
  slv->add_option("--meta", meta_path,
                  "Write sensor position slots and truth for external tools");

  // sweep
  auto* swp = app.add_subcommand("sweep", "Run the experiment grid");
  std::string config_path, sweep_out = "results.csv";
  bool full_scale = false;
  swp->add_option("--config", config_path, "Experiment config JSON");
  swp->add_flag("--full-scale", full_scale,
                "Force the 300-sensor, 50-network preset");
  swp->add_option("--out", sweep_out, "Results CSV path")->required();

  // report
  auto* rep = app.add_subcommand("report", "Aggregate a results CSV");
  std::string report_in, report_out = "summary.csv", plot_data;
  rep->add_option("--in", report_in, "Results CSV")->required();
  rep->add_option("--out", report_out, "Summary CSV path")->required();
  rep->add_option("--plot-data", plot_data, "Plot-ready wide CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_generate(sensors, anchors, radio, max_neighbors, seed,
                          symmetric_anchors, gen_out);
    if (slv->parsed())
      return cmd_solve(net_path, method, p, sigma, noise_seed, settings,
                       single_sensor_blocks, solve_out, sdpa_path, meta_path);
    if (swp->parsed()) return cmd_sweep(config_path, full_scale, sweep_out);
    if (rep->parsed()) return cmd_report(report_in, report_out, plot_data);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
