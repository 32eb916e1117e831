#pragma once

#include <array>
#include <map>
#include <utility>
#include <vector>

#include "edgeloc/conic.hpp"
#include "edgeloc/network.hpp"

namespace edgeloc {

// Layout of the lifted symmetric matrix Z of dimension 2 + n: rows 0 and 1
// form the identity block, row 2 + j belongs to sensor j. The three top-left
// entries Z00, Z01, Z11 are decision variables pinned to (1, 0, 1) by the
// base equality rows; every other entry referenced by some constraint is
// "active". Decision vector: [Z00 Z01 Z11 | active entries | alpha slacks].
struct ZLayout {
  int n_sensors = 0;
  static constexpr int kFixed = 3;
  std::vector<std::pair<int, int>> active_entries;  // (r,c), r <= c, ordered by (c,r)
  std::map<std::pair<int, int>, int> entry_index;   // fixed + active -> slot in y

  int dim() const { return n_sensors + 2; }
  int num_entries() const { return kFixed + static_cast<int>(active_entries.size()); }
  bool has_entry(int r, int c) const;
  int slot(int r, int c) const;  // throws if (r,c) is not a tracked entry

  // column slot of sensor j's position entries Z[0, 2+j], Z[1, 2+j]
  std::pair<int, int> x_slots(int sensor) const;
};

struct PsdBlockInfo {
  int i = -1;              // first sensor of the edge; -1 for single-sensor blocks
  int j = -1;              // second sensor (or the lone sensor)
  Eigen::Index row0 = 0;   // first cone row of the block
  int dim = 4;
  std::array<int, 4> z_index{};  // Z indices {0, 1, 2+i, 2+j}; dim-3 blocks use 3
  double p = 0.0;                // diagonal shift applied inside the cone
};

// Bidirectional map between network quantities and conic-program coordinates.
struct FormulationMap {
  ZLayout z;
  std::vector<std::pair<int, int>> sensor_alpha;  // (plus, minus) per sensor edge
  std::vector<std::pair<int, int>> anchor_alpha;  // (plus, minus) per anchor edge
  Eigen::Index base_row0 = 0;    // 3 rows pinning Z00, Z01, Z11
  Eigen::Index sensor_row0 = 0;  // one equality row per sensor edge
  Eigen::Index anchor_row0 = 0;  // one equality row per anchor edge
  Eigen::Index nonneg_row0 = 0;  // one row per alpha variable
  std::vector<PsdBlockInfo> psd_blocks;  // edge blocks in sensor-edge order,
                                         // then any single-sensor blocks
  int n_vars = 0;
  bool no_anchor_edges = false;  // translational gauge freedom warning

  Eigen::Index sensor_row(std::size_t edge) const { return sensor_row0 + edge; }
  Eigen::Index anchor_row(std::size_t edge) const { return anchor_row0 + edge; }

  // Dense Z assembled from a decision vector (untracked entries are zero).
  Eigen::MatrixXd dense_z(const Eigen::VectorXd& y) const;
  // Principal submatrix of Z on the block's indices (without the p shift).
  Eigen::MatrixXd z_block(const Eigen::VectorXd& y, const PsdBlockInfo& block) const;
};

struct BuildOptions {
  // Adds a 3x3 block on {0, 1, 2+j} for sensors that have anchor edges but
  // no sensor edge. Off by default: edge blocks only.
  bool single_sensor_blocks = false;
};

struct BuiltProgram {
  ConicProgram program;
  FormulationMap map;
};

// Compiles the edge-based relaxation: base rows pin the top-left block, one
// equality row per edge matches the measured squared distance with slack
// alpha+ - alpha-, alphas are tied to the nonnegative cone, and every sensor
// edge gets a 4x4 PSD block on Z indices {0, 1, 2+i, 2+j}. The objective is
// the sum of all alphas. Throws if the network has no edges.
BuiltProgram build_esdp(const MeasuredNetwork& mn, const BuildOptions& opts = {});

// Same program with each PSD block shifted: the cone slack becomes
// svec(Z_block + p*I), making the block constraint Z_block + p*I >= 0.
// p may be a uniform scalar or one value per sensor edge; p = 0 reproduces
// build_esdp exactly.
BuiltProgram build_pesdp(const MeasuredNetwork& mn, double p,
                         const BuildOptions& opts = {});
BuiltProgram build_pesdp(const MeasuredNetwork& mn,
                         const std::vector<double>& p_per_edge,
                         const BuildOptions& opts = {});

// Decision vector assembled from the true geometry: position entries from
// the true sensor coordinates, Y entries from their inner products, all
// alphas zero. Throws if the map was built for a different network shape.
Eigen::VectorXd true_solution_vector(const Network& net, const FormulationMap& map);

}  // namespace edgeloc
