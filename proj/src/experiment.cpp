#include "edgeloc/experiment.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "edgeloc/analysis.hpp"
#include "edgeloc/rng.hpp"

namespace edgeloc {

using json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kNetStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_time(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (methods.empty()) throw std::invalid_argument("config: methods must be nonempty");
  for (const auto& method : methods)
    if (method != "esdp" && method != "pesdp")
      throw std::invalid_argument("config: unknown method '" + method + "'");
  if (networks_per_cell < 1)
    throw std::invalid_argument("config: networks_per_cell (L) must be >= 1");
  if (sensors < 1 || anchors < 1)
    throw std::invalid_argument("config: sensors and anchors must be >= 1");
  if (!(radio_range > 0.0))
    throw std::invalid_argument("config: radio_range must be positive");
  if (max_neighbors < 1)
    throw std::invalid_argument("config: max_neighbors must be >= 1");
  if (sigma_grid.empty() && !size_grid)
    throw std::invalid_argument("config: sigma_grid must be nonempty");
  for (double sg : sigma_grid)
    if (!(sg >= 0.0)) throw std::invalid_argument("config: sigma values must be >= 0");
  if (size_grid) {
    if (size_grid->empty())
      throw std::invalid_argument("config: size_grid must be nonempty when set");
    for (int sz : *size_grid)
      if (sz < 1) throw std::invalid_argument("config: size_grid entries must be >= 1");
    if (!(size_sigma >= 0.0))
      throw std::invalid_argument("config: size_sigma must be >= 0");
  }
  if (!(p >= 0.0)) throw std::invalid_argument("config: p must be >= 0");
  solver.validate();
}

ExperimentConfig ExperimentConfig::full_scale() {
  ExperimentConfig config;
  config.sensors = 300;
  config.anchors = 5;
  config.radio_range = 0.2;
  config.networks_per_cell = 50;
  return config;
}

namespace {

json config_to_json(const ExperimentConfig& config) {
  json j;
  j["methods"] = config.methods;
  j["sensors"] = config.sensors;
  j["anchors"] = config.anchors;
  j["radio_range"] = config.radio_range;
  j["max_neighbors"] = config.max_neighbors;
  j["sigma_grid"] = config.sigma_grid;
  if (config.size_grid) {
    j["size_grid"] = *config.size_grid;
    j["size_sigma"] = config.size_sigma;
  }
  j["networks_per_cell"] = config.networks_per_cell;
  j["p"] = config.p;
  j["base_seed"] = config.base_seed;
  j["symmetric_anchors"] = config.symmetric_anchors;
  j["single_sensor_blocks"] = config.single_sensor_blocks;
  j["solver"] = {{"tolerance", config.solver.tolerance},
                 {"max_iterations", config.solver.max_iterations},
                 {"over_relaxation", config.solver.over_relaxation},
                 {"rho", config.solver.rho},
                 {"sigma", config.solver.sigma},
                 {"equilibrate", config.solver.equilibrate},
                 {"adaptive_rho", config.solver.adaptive_rho}};
  return j;
}

template <typename T>
void maybe_get(const json& j, const char* name, T& out) {
  if (auto it = j.find(name); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument(std::string("config: field '") + name +
                                  "' has the wrong type");
    }
  }
}

}  // namespace

std::string ExperimentConfig::to_json_text() const {
  return config_to_json(*this).dump(2);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig config;
  maybe_get(j, "methods", config.methods);
  maybe_get(j, "sensors", config.sensors);
  maybe_get(j, "anchors", config.anchors);
  maybe_get(j, "radio_range", config.radio_range);
  maybe_get(j, "max_neighbors", config.max_neighbors);
  maybe_get(j, "sigma_grid", config.sigma_grid);
  if (j.contains("size_grid")) {
    std::vector<int> sizes = j["size_grid"].get<std::vector<int>>();
    config.size_grid = sizes;
    maybe_get(j, "size_sigma", config.size_sigma);
  }
  maybe_get(j, "networks_per_cell", config.networks_per_cell);
  maybe_get(j, "p", config.p);
  maybe_get(j, "base_seed", config.base_seed);
  maybe_get(j, "symmetric_anchors", config.symmetric_anchors);
  maybe_get(j, "single_sensor_blocks", config.single_sensor_blocks);
  if (j.contains("solver")) {
    const json& s = j["solver"];
    maybe_get(s, "tolerance", config.solver.tolerance);
    maybe_get(s, "max_iterations", config.solver.max_iterations);
    maybe_get(s, "over_relaxation", config.solver.over_relaxation);
    maybe_get(s, "rho", config.solver.rho);
    maybe_get(s, "sigma", config.solver.sigma);
    maybe_get(s, "equilibrate", config.solver.equilibrate);
    maybe_get(s, "adaptive_rho", config.solver.adaptive_rho);
  }
  config.validate();
  return config;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return from_json_text(buf.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(e.what()) + " (in " + path + ")");
  }
}

std::uint64_t ExperimentConfig::config_hash() const {
  const std::string text = config_to_json(*this).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config,
                                std::ostream* progress) {
  config.validate();
  const bool size_sweep = config.size_grid.has_value();
  const std::size_t n_cells =
      size_sweep ? config.size_grid->size() : config.sigma_grid.size();

  char hash_hex[24];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(config.config_hash()));

  BuildOptions opts;
  opts.single_sensor_blocks = config.single_sensor_blocks;

  std::vector<SweepRow> rows;
  rows.reserve(config.methods.size() * n_cells * config.networks_per_cell);

  for (const std::string& method : config.methods) {
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
      const int n = size_sweep ? (*config.size_grid)[cell] : config.sensors;
      const double sigma =
          size_sweep ? config.size_sigma : config.sigma_grid[cell];
      for (int l = 0; l < config.networks_per_cell; ++l) {
        // seeds depend on the cell and replicate only: methods are paired
        const std::uint64_t net_seed =
            derive_stream(config.base_seed, kNetStream, cell, l);
        const std::uint64_t noise_seed =
            derive_stream(config.base_seed, kNoiseStream, cell, l);

        const Network net = generate_network(
            n, config.anchors, config.radio_range, config.max_neighbors,
            net_seed, {}, config.symmetric_anchors);
        const MeasuredNetwork mn = apply_noise(net, sigma, noise_seed);

        SweepRow row;
        row.run_id = std::string(hash_hex) + "-" + method + "-c" +
                     std::to_string(cell) + "-l" + std::to_string(l);
        row.method = method;
        row.n = n;
        row.m = config.anchors;
        row.r = config.radio_range;
        row.sigma = sigma;
        row.p = (method == "pesdp") ? config.p : 0.0;
        row.net_seed = net_seed;
        row.noise_seed = noise_seed;

        const auto t0 = std::chrono::steady_clock::now();
        BuiltProgram built = (method == "pesdp") ? build_pesdp(mn, config.p, opts)
                                                 : build_esdp(mn, opts);
        row.formulation_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();

        const SolveResult result = solve(built.program, config.solver);
        row.status = to_string(result.status);
        row.objective = result.primal_objective;
        row.dual_objective = result.dual_objective;
        row.gap = result.gap;
        row.iterations = result.iterations;
        row.solve_time_s = result.wall_time_seconds;
        if (result.status == SolveStatus::Optimal ||
            result.status == SolveStatus::MaxIterations) {
          const auto positions =
              extract_positions(result, built.map, net.region.center());
          row.delta = position_error(positions, net.sensors);
        } else {
          row.delta = std::numeric_limits<double>::quiet_NaN();
        }
        rows.push_back(std::move(row));
        if (progress)
          *progress << rows.back().run_id << " status=" << rows.back().status
                    << " delta=" << rows.back().delta
                    << " iters=" << rows.back().iterations << "\n"
                    << std::flush;
      }
    }
  }
  return rows;
}

namespace {
const char* kCsvHeader =
    "run_id,method,n,m,r,sigma,p,net_seed,noise_seed,status,objective,"
    "dual_objective,gap,iterations,formulation_time_s,solve_time_s,delta";
}

void write_results_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
  os << kCsvHeader << "\n";
  for (const auto& r : rows) {
    os << r.run_id << "," << r.method << "," << r.n << "," << r.m << ","
       << fmt_full(r.r) << "," << fmt_full(r.sigma) << "," << fmt_full(r.p) << ","
       << r.net_seed << "," << r.noise_seed << "," << r.status << ","
       << fmt_full(r.objective) << "," << fmt_full(r.dual_objective) << ","
       << fmt_full(r.gap) << "," << r.iterations << ","
       << fmt_time(r.formulation_time_s) << "," << fmt_time(r.solve_time_s) << ","
       << fmt_full(r.delta) << "\n";
  }
}

void write_results_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_results_csv(rows, out);
}

std::vector<SweepRow> read_results_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("results csv: empty file");
  if (line != kCsvHeader)
    throw std::runtime_error("results csv: unexpected header");

  std::vector<SweepRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() != 17)
      throw std::runtime_error("results csv: bad row with " +
                               std::to_string(f.size()) + " fields");
    SweepRow r;
    r.run_id = f[0];
    r.method = f[1];
    r.n = std::stoi(f[2]);
    r.m = std::stoi(f[3]);
    r.r = std::stod(f[4]);
    r.sigma = std::stod(f[5]);
    r.p = std::stod(f[6]);
    r.net_seed = std::stoull(f[7]);
    r.noise_seed = std::stoull(f[8]);
    r.status = f[9];
    r.objective = std::stod(f[10]);
    r.dual_objective = std::stod(f[11]);
    r.gap = std::stod(f[12]);
    r.iterations = std::stoi(f[13]);
    r.formulation_time_s = std::stod(f[14]);
    r.solve_time_s = std::stod(f[15]);
    r.delta = std::stod(f[16]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<SweepRow> read_results_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open results csv: " + path);
  return read_results_csv(in);
}

std::vector<SummaryRow> summarize(const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("summarize: no rows");
  // the cell axis is the sensor count when it varies, otherwise sigma
  bool n_varies = false;
  for (const auto& r : rows) n_varies |= (r.n != rows.front().n);

  std::map<std::pair<std::string, double>, std::vector<const SweepRow*>> groups;
  for (const auto& r : rows)
    groups[{r.method, n_varies ? static_cast<double>(r.n) : r.sigma}].push_back(&r);

  std::vector<SummaryRow> out;
  for (const auto& [key, members] : groups) {
    SummaryRow s;
    s.method = key.first;
    s.cell = key.second;
    s.count = static_cast<int>(members.size());
    double sum = 0.0, sum_time = 0.0;
    for (const auto* r : members) {
      sum += r->delta;
      sum_time += r->solve_time_s;
    }
    s.mean_pe = sum / s.count;
    s.mean_solve_time_s = sum_time / s.count;
    double sq = 0.0;
    for (const auto* r : members) sq += (r->delta - s.mean_pe) * (r->delta - s.mean_pe);
    s.std_pe = s.count > 1 ? std::sqrt(sq / (s.count - 1)) : 0.0;
    out.push_back(std::move(s));
  }
  return out;
}

void write_summary_csv(const std::vector<SummaryRow>& summary, std::ostream& os) {
  os << "method,cell,mean_PE,std_PE,mean_solve_time_s,count\n";
  for (const auto& s : summary)
    os << s.method << "," << fmt_full(s.cell) << "," << fmt_full(s.mean_pe) << ","
       << fmt_full(s.std_pe) << "," << fmt_time(s.mean_solve_time_s) << ","
       << s.count << "\n";
}

void write_summary_csv(const std::vector<SummaryRow>& summary,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_summary_csv(summary, out);
}

void write_plot_data(const std::vector<SummaryRow>& summary, std::ostream& os) {
  std::vector<std::string> methods;
  std::vector<double> cells;
  for (const auto& s : summary) {
    if (std::find(methods.begin(), methods.end(), s.method) == methods.end())
      methods.push_back(s.method);
    if (std::find(cells.begin(), cells.end(), s.cell) == cells.end())
      cells.push_back(s.cell);
  }
  std::sort(methods.begin(), methods.end());
  std::sort(cells.begin(), cells.end());

  os << "cell";
  for (const auto& method : methods)
    os << ",mean_PE_" << method << ",mean_solve_time_s_" << method;
  os << "\n";
  for (double cell : cells) {
    os << fmt_full(cell);
    for (const auto& method : methods) {
      const SummaryRow* found = nullptr;
      for (const auto& s : summary)
        if (s.method == method && s.cell == cell) found = &s;
      if (found)
        os << "," << fmt_full(found->mean_pe) << ","
           << fmt_time(found->mean_solve_time_s);
      else
        os << ",,";
    }
    os << "\n";
  }
}

void write_plot_data(const std::vector<SummaryRow>& summary,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_plot_data(summary, out);
}

}  // namespace edgeloc
