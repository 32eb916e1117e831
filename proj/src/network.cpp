#include "edgeloc/network.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "edgeloc/rng.hpp"

namespace edgeloc {

using json = nlohmann::ordered_json;

namespace {

constexpr int kFormatVersion = 1;

// stream tags for derive_stream
constexpr std::uint64_t kSensorCoords = 0x01;
constexpr std::uint64_t kAnchorCoords = 0x02;
constexpr std::uint64_t kSensorEdgeNoise = 0x11;
constexpr std::uint64_t kAnchorEdgeNoise = 0x12;

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::runtime_error(msg);
}

}  // namespace

std::string sensor_edge_key(int i, int j) {
  return "s:" + std::to_string(i) + "-" + std::to_string(j);
}

std::string anchor_edge_key(int j, int k) {
  return "a:" + std::to_string(j) + "-" + std::to_string(k);
}

void Network::validate() const {
  require(radio_range > 0.0, "network: radio_range must be positive");
  require(max_neighbors >= 1, "network: max_neighbors must be >= 1");
  require(region.width() > 0.0 && region.height() > 0.0,
          "network: degenerate region");
  require(sensor_true_dist.size() == sensor_edges.size() &&
              anchor_true_dist.size() == anchor_edges.size(),
          "network: distance arrays must parallel the edge lists");

  const int n = num_sensors();
  const int m = num_anchors();
  std::vector<int> degree(n, 0);
  std::set<IndexPair> seen;
  for (std::size_t e = 0; e < sensor_edges.size(); ++e) {
    const auto [i, j] = sensor_edges[e];
    require(i >= 0 && j < n && i < j, "network: sensor edge must have 0 <= i < j < n");
    require(seen.insert({i, j}).second, "network: duplicate sensor edge");
    const double d = (sensors[i] - sensors[j]).norm();
    require(d < radio_range, "network: sensor edge out of radio range");
    require(std::abs(d - sensor_true_dist[e]) <= 1e-12,
            "network: stored sensor distance disagrees with geometry");
    ++degree[i];
    ++degree[j];
  }
  require(std::is_sorted(sensor_edges.begin(), sensor_edges.end()),
          "network: sensor edges must be sorted");
  for (int d : degree)
    require(d <= max_neighbors, "network: sensor exceeds max_neighbors");

  std::set<IndexPair> seen_a;
  for (std::size_t e = 0; e < anchor_edges.size(); ++e) {
    const auto [j, k] = anchor_edges[e];
    require(j >= 0 && j < n && k >= 0 && k < m,
            "network: anchor edge indices out of range");
    require(seen_a.insert({j, k}).second, "network: duplicate anchor edge");
    const double d = (sensors[j] - anchors[k]).norm();
    require(d < radio_range, "network: anchor edge out of radio range");
    require(std::abs(d - anchor_true_dist[e]) <= 1e-12,
            "network: stored anchor distance disagrees with geometry");
  }
  require(std::is_sorted(anchor_edges.begin(), anchor_edges.end()),
          "network: anchor edges must be sorted");
}

void MeasuredNetwork::validate() const {
  base.validate();
  require(noise_std >= 0.0, "measured network: noise_std must be >= 0");
  require(sensor_noise.size() == base.sensor_edges.size() &&
              anchor_noise.size() == base.anchor_edges.size() &&
              sensor_measured.size() == base.sensor_edges.size() &&
              anchor_measured.size() == base.anchor_edges.size(),
          "measured network: noise arrays must parallel the edge lists");
  for (std::size_t e = 0; e < sensor_noise.size(); ++e) {
    require(sensor_measured[e] ==
                std::abs(base.sensor_true_dist[e] + sensor_noise[e]),
            "measured network: sensor measurement != |true + noise|");
    if (noise_std == 0.0)
      require(sensor_noise[e] == 0.0,
              "measured network: nonzero noise sample with noise_std == 0");
  }
  for (std::size_t e = 0; e < anchor_noise.size(); ++e) {
    require(anchor_measured[e] ==
                std::abs(base.anchor_true_dist[e] + anchor_noise[e]),
            "measured network: anchor measurement != |true + noise|");
    if (noise_std == 0.0)
      require(anchor_noise[e] == 0.0,
              "measured network: nonzero noise sample with noise_std == 0");
  }
}

namespace {

std::vector<Eigen::Vector2d> symmetric_anchor_pattern(int m, const Region& rg) {
  // four corners, center, four edge midpoints; m == 5 gives corners + center
  const double cx = rg.center().x(), cy = rg.center().y();
  const std::vector<Eigen::Vector2d> pattern = {
      {rg.xmin, rg.ymin},
      {rg.xmax, rg.ymin},
      {rg.xmin, rg.ymax},
      {rg.xmax, rg.ymax},
      {cx, cy},
      {cx, rg.ymin},
      {cx, rg.ymax},
      {rg.xmin, cy},
      {rg.xmax, cy},
  };
  if (m > static_cast<int>(pattern.size()))
    throw std::invalid_argument(
        "generate_network: symmetric anchor pattern supports at most 9 anchors");
  return {pattern.begin(), pattern.begin() + m};
}

}  // namespace

Network generate_network(int n_sensors, int n_anchors, double radio_range,
                         int max_neighbors, std::uint64_t seed,
                         const Region& region, bool symmetric_anchors) {
  if (n_sensors < 1) throw std::invalid_argument("generate_network: n_sensors must be >= 1");
  if (n_anchors < 1) throw std::invalid_argument("generate_network: n_anchors must be >= 1");
  if (!(radio_range > 0.0)) throw std::invalid_argument("generate_network: radio_range must be positive");
  if (max_neighbors < 1) throw std::invalid_argument("generate_network: max_neighbors must be >= 1");
  if (!(region.width() > 0.0) || !(region.height() > 0.0))
    throw std::invalid_argument("generate_network: degenerate region");

  Network net;
  net.radio_range = radio_range;
  net.max_neighbors = max_neighbors;
  net.seed = seed;
  net.region = region;

  Rng sensor_rng(derive_stream(seed, kSensorCoords));
  net.sensors.reserve(n_sensors);
  for (int i = 0; i < n_sensors; ++i) {
    const double x = sensor_rng.uniform(region.xmin, region.xmax);
    const double y = sensor_rng.uniform(region.ymin, region.ymax);
    net.sensors.emplace_back(x, y);
  }

  if (symmetric_anchors) {
    net.anchors = symmetric_anchor_pattern(n_anchors, region);
  } else {
    Rng anchor_rng(derive_stream(seed, kAnchorCoords));
    net.anchors.reserve(n_anchors);
    for (int k = 0; k < n_anchors; ++k) {
      const double x = anchor_rng.uniform(region.xmin, region.xmax);
      const double y = anchor_rng.uniform(region.ymin, region.ymax);
      net.anchors.emplace_back(x, y);
    }
  }

  // candidate sensor neighbors, then mutual nearest-neighbor cap
  std::vector<std::vector<std::pair<double, int>>> near(n_sensors);
  for (int i = 0; i < n_sensors; ++i) {
    for (int j = i + 1; j < n_sensors; ++j) {
      const double d = (net.sensors[i] - net.sensors[j]).norm();
      if (d < radio_range) {
        near[i].push_back({d, j});
        near[j].push_back({d, i});
      }
    }
  }
  std::vector<std::set<int>> keep(n_sensors);
  for (int i = 0; i < n_sensors; ++i) {
    auto& cand = near[i];
    std::sort(cand.begin(), cand.end());  // by distance, then partner index
    const int cap = std::min<std::size_t>(max_neighbors, cand.size());
    for (int t = 0; t < cap; ++t) keep[i].insert(cand[t].second);
  }
  for (int i = 0; i < n_sensors; ++i) {
    for (int j : keep[i]) {
      if (j > i && keep[j].count(i)) {
        net.sensor_edges.push_back({i, j});
        net.sensor_true_dist.push_back((net.sensors[i] - net.sensors[j]).norm());
      }
    }
  }

  for (int j = 0; j < n_sensors; ++j) {
    for (int k = 0; k < n_anchors; ++k) {
      const double d = (net.sensors[j] - net.anchors[k]).norm();
      if (d < radio_range) {
        net.anchor_edges.push_back({j, k});
        net.anchor_true_dist.push_back(d);
      }
    }
  }

  net.validate();
  return net;
}

MeasuredNetwork apply_noise(const Network& net, double noise_std,
                            std::uint64_t noise_seed) {
  if (!(noise_std >= 0.0))
    throw std::invalid_argument("apply_noise: noise_std must be >= 0");

  MeasuredNetwork mn;
  mn.base = net;
  mn.noise_std = noise_std;
  mn.noise_seed = noise_seed;
  mn.sensor_noise.reserve(net.sensor_edges.size());
  for (auto [i, j] : net.sensor_edges) {
    Rng edge_rng(derive_stream(noise_seed, kSensorEdgeNoise, i, j));
    mn.sensor_noise.push_back(noise_std * edge_rng.normal());
  }
  mn.anchor_noise.reserve(net.anchor_edges.size());
  for (auto [j, k] : net.anchor_edges) {
    Rng edge_rng(derive_stream(noise_seed, kAnchorEdgeNoise, j, k));
    mn.anchor_noise.push_back(noise_std * edge_rng.normal());
  }
  mn.sensor_measured.resize(mn.sensor_noise.size());
  for (std::size_t e = 0; e < mn.sensor_noise.size(); ++e)
    mn.sensor_measured[e] = std::abs(net.sensor_true_dist[e] + mn.sensor_noise[e]);
  mn.anchor_measured.resize(mn.anchor_noise.size());
  for (std::size_t e = 0; e < mn.anchor_noise.size(); ++e)
    mn.anchor_measured[e] = std::abs(net.anchor_true_dist[e] + mn.anchor_noise[e]);
  mn.validate();
  return mn;
}

MeasuredNetwork apply_noise_samples(const Network& net, double noise_std_label,
                                    const std::vector<double>& sensor_samples,
                                    const std::vector<double>& anchor_samples) {
  if (!(noise_std_label >= 0.0))
    throw std::invalid_argument("apply_noise_samples: noise_std must be >= 0");
  if (sensor_samples.size() != net.sensor_edges.size() ||
      anchor_samples.size() != net.anchor_edges.size())
    throw std::invalid_argument(
        "apply_noise_samples: sample arrays must parallel the edge lists");

  MeasuredNetwork mn;
  mn.base = net;
  mn.noise_std = noise_std_label;
  mn.noise_seed = 0;
  mn.sensor_noise = sensor_samples;
  mn.anchor_noise = anchor_samples;
  mn.sensor_measured.resize(sensor_samples.size());
  for (std::size_t e = 0; e < sensor_samples.size(); ++e)
    mn.sensor_measured[e] = std::abs(net.sensor_true_dist[e] + sensor_samples[e]);
  mn.anchor_measured.resize(anchor_samples.size());
  for (std::size_t e = 0; e < anchor_samples.size(); ++e)
    mn.anchor_measured[e] = std::abs(net.anchor_true_dist[e] + anchor_samples[e]);
  mn.validate();
  return mn;
}

MeasuredNetwork exact_measurement(const Network& net) {
  return apply_noise(net, 0.0, 0);
}

namespace {

json region_to_json(const Region& rg) {
  return json{{"xmin", rg.xmin}, {"xmax", rg.xmax}, {"ymin", rg.ymin}, {"ymax", rg.ymax}};
}

json points_to_json(const std::vector<Eigen::Vector2d>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back(json::array({p.x(), p.y()}));
  return arr;
}

json edges_to_json(const std::vector<IndexPair>& edges) {
  json arr = json::array();
  for (auto [a, b] : edges) arr.push_back(json::array({a, b}));
  return arr;
}

json base_to_json(const Network& net) {
  json j;
  j["version"] = kFormatVersion;
  j["region"] = region_to_json(net.region);
  j["radio_range"] = net.radio_range;
  j["max_neighbors"] = net.max_neighbors;
  j["seed"] = net.seed;
  j["sensors"] = points_to_json(net.sensors);
  j["anchors"] = points_to_json(net.anchors);
  j["sensor_edges"] = edges_to_json(net.sensor_edges);
  j["anchor_edges"] = edges_to_json(net.anchor_edges);
  json dist;
  for (std::size_t e = 0; e < net.sensor_edges.size(); ++e)
    dist[sensor_edge_key(net.sensor_edges[e].first, net.sensor_edges[e].second)] =
        net.sensor_true_dist[e];
  for (std::size_t e = 0; e < net.anchor_edges.size(); ++e)
    dist[anchor_edge_key(net.anchor_edges[e].first, net.anchor_edges[e].second)] =
        net.anchor_true_dist[e];
  j["true_distances"] = dist;
  return j;
}

void write_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

const json& field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end())
    throw std::runtime_error(std::string("network file: missing field '") + name + "'");
  return *it;
}

double number_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_number())
    throw std::runtime_error(std::string("network file: field '") + name +
                             "' must be a number");
  return v.get<double>();
}

std::vector<Eigen::Vector2d> points_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_array())
    throw std::runtime_error(std::string("network file: field '") + name +
                             "' must be an array");
  std::vector<Eigen::Vector2d> pts;
  for (const auto& p : v) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw std::runtime_error(std::string("network file: field '") + name +
                               "' must contain [x,y] pairs");
    pts.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return pts;
}

std::vector<IndexPair> edges_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_array())
    throw std::runtime_error(std::string("network file: field '") + name +
                             "' must be an array");
  std::vector<IndexPair> edges;
  for (const auto& p : v) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
        !p[1].is_number_integer())
      throw std::runtime_error(std::string("network file: field '") + name +
                               "' must contain [i,j] index pairs");
    edges.push_back({p[0].get<int>(), p[1].get<int>()});
  }
  return edges;
}

// reads a per-edge map keyed by canonical edge strings, in edge-list order
std::vector<double> edge_map_field(const json& j, const char* name,
                                   const std::vector<IndexPair>& sensor_edges,
                                   const std::vector<IndexPair>& anchor_edges,
                                   bool anchors) {
  const json& v = field(j, name);
  if (!v.is_object())
    throw std::runtime_error(std::string("network file: field '") + name +
                             "' must be an object keyed by edge");
  const auto& edges = anchors ? anchor_edges : sensor_edges;
  std::vector<double> out;
  out.reserve(edges.size());
  for (auto [a, b] : edges) {
    const std::string key = anchors ? anchor_edge_key(a, b) : sensor_edge_key(a, b);
    auto it = v.find(key);
    if (it == v.end() || !it->is_number())
      throw std::runtime_error(std::string("network file: field '") + name +
                               "' is missing entry '" + key + "'");
    out.push_back(it->get<double>());
  }
  return out;
}

Network base_from_json(const json& j) {
  const json& ver = field(j, "version");
  if (!ver.is_number_integer() || ver.get<int>() != kFormatVersion)
    throw std::runtime_error("network file: unsupported version (expected " +
                             std::to_string(kFormatVersion) + ")");
  Network net;
  const json& rg = field(j, "region");
  net.region = {number_field(rg, "xmin"), number_field(rg, "xmax"),
                number_field(rg, "ymin"), number_field(rg, "ymax")};
  net.radio_range = number_field(j, "radio_range");
  net.max_neighbors = static_cast<int>(number_field(j, "max_neighbors"));
  net.seed = field(j, "seed").get<std::uint64_t>();
  net.sensors = points_field(j, "sensors");
  net.anchors = points_field(j, "anchors");
  net.sensor_edges = edges_field(j, "sensor_edges");
  net.anchor_edges = edges_field(j, "anchor_edges");
  net.sensor_true_dist = edge_map_field(j, "true_distances", net.sensor_edges,
                                        net.anchor_edges, false);
  net.anchor_true_dist = edge_map_field(j, "true_distances", net.sensor_edges,
                                        net.anchor_edges, true);
  net.validate();
  return net;
}

}  // namespace

void save_network(const Network& net, const std::string& path) {
  net.validate();
  write_file(base_to_json(net), path);
}

void save_network(const MeasuredNetwork& mn, const std::string& path) {
  mn.validate();
  json j = base_to_json(mn.base);
  j["noise_std"] = mn.noise_std;
  j["noise_seed"] = mn.noise_seed;
  json samples, measured;
  const auto& se = mn.base.sensor_edges;
  const auto& ae = mn.base.anchor_edges;
  for (std::size_t e = 0; e < se.size(); ++e) {
    samples[sensor_edge_key(se[e].first, se[e].second)] = mn.sensor_noise[e];
    measured[sensor_edge_key(se[e].first, se[e].second)] = mn.sensor_measured[e];
  }
  for (std::size_t e = 0; e < ae.size(); ++e) {
    samples[anchor_edge_key(ae[e].first, ae[e].second)] = mn.anchor_noise[e];
    measured[anchor_edge_key(ae[e].first, ae[e].second)] = mn.anchor_measured[e];
  }
  j["noise_samples"] = samples;
  j["measured_distances"] = measured;
  write_file(j, path);
}

std::variant<Network, MeasuredNetwork> load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open network file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("network file: invalid JSON in " + path + ": " + e.what());
  }
  Network net = base_from_json(j);
  if (!j.contains("noise_std") && !j.contains("measured_distances")) return net;

  MeasuredNetwork mn;
  mn.base = std::move(net);
  mn.noise_std = number_field(j, "noise_std");
  if (mn.noise_std < 0.0)
    throw std::runtime_error("network file: field 'noise_std' must be >= 0");
  mn.noise_seed = field(j, "noise_seed").get<std::uint64_t>();
  mn.sensor_noise = edge_map_field(j, "noise_samples", mn.base.sensor_edges,
                                   mn.base.anchor_edges, false);
  mn.anchor_noise = edge_map_field(j, "noise_samples", mn.base.sensor_edges,
                                   mn.base.anchor_edges, true);
  mn.sensor_measured = edge_map_field(j, "measured_distances", mn.base.sensor_edges,
                                      mn.base.anchor_edges, false);
  mn.anchor_measured = edge_map_field(j, "measured_distances", mn.base.sensor_edges,
                                      mn.base.anchor_edges, true);
  mn.validate();
  return mn;
}

Network load_network(const std::string& path) {
  auto inst = load_instance(path);
  if (auto* net = std::get_if<Network>(&inst)) return std::move(*net);
  throw std::runtime_error("expected a plain network file (got measured): " + path);
}

MeasuredNetwork load_measured(const std::string& path) {
  auto inst = load_instance(path);
  if (auto* mn = std::get_if<MeasuredNetwork>(&inst)) return std::move(*mn);
  throw std::runtime_error("expected a measured network file: " + path);
}

}  // namespace edgeloc
