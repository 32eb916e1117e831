#include "edgeloc/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "edgeloc/cones.hpp"

namespace edgeloc {

namespace {
const double kSqrt2 = std::sqrt(2.0);

std::pair<int, int> norm_entry(int r, int c) {
  return r <= c ? std::pair{r, c} : std::pair{c, r};
}
}  // namespace

bool ZLayout::has_entry(int r, int c) const {
  return entry_index.count(norm_entry(r, c)) > 0;
}

int ZLayout::slot(int r, int c) const {
  auto it = entry_index.find(norm_entry(r, c));
  if (it == entry_index.end())
    throw std::invalid_argument("ZLayout: entry (" + std::to_string(r) + "," +
                                std::to_string(c) + ") is not tracked");
  return it->second;
}

std::pair<int, int> ZLayout::x_slots(int sensor) const {
  return {slot(0, 2 + sensor), slot(1, 2 + sensor)};
}

Eigen::MatrixXd FormulationMap::dense_z(const Eigen::VectorXd& y) const {
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(z.dim(), z.dim());
  for (const auto& [entry, slot] : z.entry_index) {
    Z(entry.first, entry.second) = y[slot];
    Z(entry.second, entry.first) = y[slot];
  }
  return Z;
}

Eigen::MatrixXd FormulationMap::z_block(const Eigen::VectorXd& y,
                                        const PsdBlockInfo& block) const {
  Eigen::MatrixXd B(block.dim, block.dim);
  for (int a = 0; a < block.dim; ++a)
    for (int b = 0; b < block.dim; ++b)
      B(a, b) = y[z.slot(block.z_index[a], block.z_index[b])];
  return B;
}

namespace {

BuiltProgram build_impl(const MeasuredNetwork& mn,
                        const std::vector<double>& p_per_edge,
                        double p_single_sensor, const BuildOptions& opts) {
  const Network& net = mn.base;
  const int n = net.num_sensors();
  const auto& se = net.sensor_edges;
  const auto& ae = net.anchor_edges;
  const std::size_t n_se = se.size(), n_ae = ae.size();

  if (n_se + n_ae == 0)
    throw std::invalid_argument("build: network has no edges");
  if (p_per_edge.size() != n_se)
    throw std::invalid_argument("build: need one perturbation value per sensor edge");
  for (double p : p_per_edge)
    if (!(p >= 0.0)) throw std::invalid_argument("build: perturbation must be >= 0");

  FormulationMap map;
  map.z.n_sensors = n;
  map.no_anchor_edges = (n_ae == 0);

  // sensors that have only anchor edges, for the optional 3x3 blocks
  std::vector<bool> in_sensor_edge(n, false), in_anchor_edge(n, false);
  for (auto [i, j] : se) in_sensor_edge[i] = in_sensor_edge[j] = true;
  for (auto [j, k] : ae) in_anchor_edge[j] = true;

  // entries ordered by (column, row); fixed top-left three come first
  std::set<std::pair<int, int>, bool (*)(const std::pair<int, int>&,
                                         const std::pair<int, int>&)>
      active([](const std::pair<int, int>& a, const std::pair<int, int>& b) {
        return std::pair{a.second, a.first} < std::pair{b.second, b.first};
      });
  for (int j = 0; j < n; ++j) {
    if (in_sensor_edge[j] || in_anchor_edge[j]) {
      active.insert({0, 2 + j});
      active.insert({1, 2 + j});
      active.insert({2 + j, 2 + j});
    }
  }
  for (auto [i, j] : se) active.insert({2 + i, 2 + j});

  map.z.entry_index[{0, 0}] = 0;
  map.z.entry_index[{0, 1}] = 1;
  map.z.entry_index[{1, 1}] = 2;
  map.z.active_entries.assign(active.begin(), active.end());
  for (std::size_t t = 0; t < map.z.active_entries.size(); ++t)
    map.z.entry_index[map.z.active_entries[t]] = ZLayout::kFixed + static_cast<int>(t);

  const int n_entries = map.z.num_entries();
  int next = n_entries;
  for (std::size_t e = 0; e < n_se; ++e, next += 2)
    map.sensor_alpha.push_back({next, next + 1});
  for (std::size_t e = 0; e < n_ae; ++e, next += 2)
    map.anchor_alpha.push_back({next, next + 1});
  map.n_vars = next;

  // rows: 3 base, one per edge, one per alpha, then the PSD blocks
  const Eigen::Index n_alpha = 2 * static_cast<Eigen::Index>(n_se + n_ae);
  map.base_row0 = 0;
  map.sensor_row0 = 3;
  map.anchor_row0 = 3 + static_cast<Eigen::Index>(n_se);
  map.nonneg_row0 = map.anchor_row0 + static_cast<Eigen::Index>(n_ae);

  ConeLayout cones;
  cones.zero = map.nonneg_row0;
  cones.nonneg = n_alpha;

  Eigen::Index row = cones.zero + cones.nonneg;
  for (std::size_t e = 0; e < n_se; ++e) {
    PsdBlockInfo blk;
    blk.i = se[e].first;
    blk.j = se[e].second;
    blk.row0 = row;
    blk.dim = 4;
    blk.z_index = {0, 1, 2 + se[e].first, 2 + se[e].second};
    blk.p = p_per_edge[e];
    map.psd_blocks.push_back(blk);
    cones.psd.push_back(4);
    row += svec_size(4);
  }
  if (opts.single_sensor_blocks) {
    for (int j = 0; j < n; ++j) {
      if (in_anchor_edge[j] && !in_sensor_edge[j]) {
        PsdBlockInfo blk;
        blk.i = -1;
        blk.j = j;
        blk.row0 = row;
        blk.dim = 3;
        blk.z_index = {0, 1, 2 + j, -1};
        blk.p = p_single_sensor;
        map.psd_blocks.push_back(blk);
        cones.psd.push_back(3);
        row += svec_size(3);
      }
    }
  }

  ConicProgram prog;
  prog.cones = cones;
  prog.b = Eigen::VectorXd::Zero(row);
  prog.c = Eigen::VectorXd::Zero(map.n_vars);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(16 * (n_se + n_ae) + 10 * map.psd_blocks.size());

  // base rows: Z00 = 1, Z01 = 0, Z11 = 1
  trip.emplace_back(0, map.z.slot(0, 0), 1.0);
  trip.emplace_back(1, map.z.slot(0, 1), 1.0);
  trip.emplace_back(2, map.z.slot(1, 1), 1.0);
  prog.b[0] = 1.0;
  prog.b[1] = 0.0;
  prog.b[2] = 1.0;

  // sensor edge rows: Yii - 2 Yij + Yjj - a+ + a- = dhat^2
  for (std::size_t e = 0; e < n_se; ++e) {
    const auto [i, j] = se[e];
    const Eigen::Index r = map.sensor_row(e);
    trip.emplace_back(r, map.z.slot(2 + i, 2 + i), 1.0);
    trip.emplace_back(r, map.z.slot(2 + i, 2 + j), -2.0);
    trip.emplace_back(r, map.z.slot(2 + j, 2 + j), 1.0);
    trip.emplace_back(r, map.sensor_alpha[e].first, -1.0);
    trip.emplace_back(r, map.sensor_alpha[e].second, 1.0);
    prog.b[r] = mn.sensor_measured[e] * mn.sensor_measured[e];
  }

  // anchor edge rows carry the full quadratic form (-a; e_j)' Z (-a; e_j),
  // including the top-left block entries, so b is exactly dhat^2
  for (std::size_t e = 0; e < n_ae; ++e) {
    const auto [j, k] = ae[e];
    const Eigen::Vector2d a = net.anchors[k];
    const Eigen::Index r = map.anchor_row(e);
    trip.emplace_back(r, map.z.slot(0, 0), a.x() * a.x());
    if (a.x() != 0.0 && a.y() != 0.0)
      trip.emplace_back(r, map.z.slot(0, 1), 2.0 * a.x() * a.y());
    trip.emplace_back(r, map.z.slot(1, 1), a.y() * a.y());
    const auto [x1, x2] = map.z.x_slots(j);
    trip.emplace_back(r, x1, -2.0 * a.x());
    trip.emplace_back(r, x2, -2.0 * a.y());
    trip.emplace_back(r, map.z.slot(2 + j, 2 + j), 1.0);
    trip.emplace_back(r, map.anchor_alpha[e].first, -1.0);
    trip.emplace_back(r, map.anchor_alpha[e].second, 1.0);
    prog.b[r] = mn.anchor_measured[e] * mn.anchor_measured[e];
  }

  // nonnegative rows tie each alpha to the cone: s = alpha
  Eigen::Index nn = map.nonneg_row0;
  auto tie_alpha = [&](std::pair<int, int> slots) {
    trip.emplace_back(nn, slots.first, -1.0);
    prog.c[slots.first] = 1.0;
    ++nn;
    trip.emplace_back(nn, slots.second, -1.0);
    prog.c[slots.second] = 1.0;
    ++nn;
  };
  for (auto slots : map.sensor_alpha) tie_alpha(slots);
  for (auto slots : map.anchor_alpha) tie_alpha(slots);

  // PSD blocks: s_block = svec(Z_block + p I), row coefficients -svec weight
  for (const auto& blk : map.psd_blocks) {
    for (int cidx = 0; cidx < blk.dim; ++cidx) {
      for (int ridx = 0; ridx <= cidx; ++ridx) {
        const Eigen::Index r = blk.row0 + svec_slot(ridx, cidx);
        const double w = (ridx == cidx) ? 1.0 : kSqrt2;
        trip.emplace_back(r, map.z.slot(blk.z_index[ridx], blk.z_index[cidx]), -w);
        if (ridx == cidx) prog.b[r] = blk.p;
      }
    }
  }

  prog.A.resize(row, map.n_vars);
  prog.A.setFromTriplets(trip.begin(), trip.end());
  prog.A.makeCompressed();
  prog.validate();
  return {std::move(prog), std::move(map)};
}

}  // namespace

BuiltProgram build_esdp(const MeasuredNetwork& mn, const BuildOptions& opts) {
  return build_impl(mn, std::vector<double>(mn.base.sensor_edges.size(), 0.0), 0.0,
                    opts);
}

BuiltProgram build_pesdp(const MeasuredNetwork& mn, double p,
                         const BuildOptions& opts) {
  if (!(p >= 0.0)) throw std::invalid_argument("build_pesdp: p must be >= 0");
  return build_impl(mn, std::vector<double>(mn.base.sensor_edges.size(), p), p, opts);
}

BuiltProgram build_pesdp(const MeasuredNetwork& mn,
                         const std::vector<double>& p_per_edge,
                         const BuildOptions& opts) {
  const double p_single =
      p_per_edge.empty() ? 0.0
                         : *std::min_element(p_per_edge.begin(), p_per_edge.end());
  return build_impl(mn, p_per_edge, p_single, opts);
}

Eigen::VectorXd true_solution_vector(const Network& net, const FormulationMap& map) {
  if (map.z.n_sensors != net.num_sensors())
    throw std::invalid_argument("true_solution_vector: map built for a different network");

  Eigen::VectorXd y = Eigen::VectorXd::Zero(map.n_vars);
  y[map.z.slot(0, 0)] = 1.0;
  y[map.z.slot(0, 1)] = 0.0;
  y[map.z.slot(1, 1)] = 1.0;
  for (const auto& entry : map.z.active_entries) {
    const auto [r, c] = entry;
    const int slot = map.z.entry_index.at(entry);
    if (r < 2) {
      y[slot] = net.sensors[c - 2][r];  // position entry Z[r, 2+j]
    } else {
      y[slot] = net.sensors[r - 2].dot(net.sensors[c - 2]);  // Y entry
    }
  }
  return y;
}

}  // namespace edgeloc
