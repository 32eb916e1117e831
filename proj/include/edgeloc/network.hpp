#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace edgeloc {

struct Region {
  double xmin = -0.5;
  double xmax = 0.5;
  double ymin = -0.5;
  double ymax = 0.5;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  Eigen::Vector2d center() const {
    return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)};
  }
};

using IndexPair = std::pair<int, int>;

// A sensor network instance with exact geometry. Sensor edges are stored
// with i < j; anchor edges as (sensor j, anchor k). Both lists are sorted,
// which fixes the enumeration order everywhere downstream.
struct Network {
  std::vector<Eigen::Vector2d> sensors;
  std::vector<Eigen::Vector2d> anchors;
  double radio_range = 0.0;
  int max_neighbors = 5;
  std::vector<IndexPair> sensor_edges;
  std::vector<IndexPair> anchor_edges;
  std::vector<double> sensor_true_dist;  // parallel to sensor_edges
  std::vector<double> anchor_true_dist;  // parallel to anchor_edges
  std::uint64_t seed = 0;
  Region region;

  int num_sensors() const { return static_cast<int>(sensors.size()); }
  int num_anchors() const { return static_cast<int>(anchors.size()); }
  int num_edges() const {
    return static_cast<int>(sensor_edges.size() + anchor_edges.size());
  }

  // Throws std::runtime_error on any violated invariant: edge within radio
  // range, stored distance equal to the Euclidean distance (1e-12), neighbor
  // cap respected, sorted edge lists without duplicates or self-loops.
  void validate() const;
};

// A network together with measured (noisy) distances. For every edge,
// measured = |true + noise_sample|.
struct MeasuredNetwork {
  Network base;
  double noise_std = 0.0;
  std::uint64_t noise_seed = 0;
  std::vector<double> sensor_noise;
  std::vector<double> anchor_noise;
  std::vector<double> sensor_measured;
  std::vector<double> anchor_measured;

  void validate() const;
};

// Draws sensors and anchors i.i.d. uniform in the region, connects all pairs
// closer than radio_range, then prunes sensor edges so that every sensor
// keeps at most max_neighbors of its nearest in-range sensor neighbors (an
// edge survives only if it is within the cap of both endpoints; ties broken
// by lower partner index). Anchor edges are never pruned. Deterministic for
// fixed arguments.
//
// symmetric_anchors places anchors on a fixed pattern (center, corners, edge
// midpoints; up to 9) instead of drawing them.
Network generate_network(int n_sensors, int n_anchors, double radio_range,
                         int max_neighbors, std::uint64_t seed,
                         const Region& region = {},
                         bool symmetric_anchors = false);

// Independent Gaussian draw per edge with mean 0 and std noise_std. Each
// edge's draw comes from a stream derived from (noise_seed, edge), so
// enumeration order cannot change results.
MeasuredNetwork apply_noise(const Network& net, double noise_std,
                            std::uint64_t noise_seed);

// Measured distances built from caller-provided signed offsets; used for
// constructing instances with prescribed perturbations.
MeasuredNetwork apply_noise_samples(const Network& net, double noise_std_label,
                                    const std::vector<double>& sensor_samples,
                                    const std::vector<double>& anchor_samples);

// Measured network with zero noise (measured == true distances).
MeasuredNetwork exact_measurement(const Network& net);

void save_network(const Network& net, const std::string& path);
void save_network(const MeasuredNetwork& mn, const std::string& path);

// Loads either flavor; a file is measured iff it carries noise fields.
// Validates all invariants and throws std::runtime_error naming the
// offending field on malformed input or version mismatch.
std::variant<Network, MeasuredNetwork> load_instance(const std::string& path);

Network load_network(const std::string& path);
MeasuredNetwork load_measured(const std::string& path);

// Canonical key for an edge: "s:i-j" for sensor pairs, "a:j-k" for
// sensor-anchor pairs.
std::string sensor_edge_key(int i, int j);
std::string anchor_edge_key(int j, int k);

}  // namespace edgeloc
