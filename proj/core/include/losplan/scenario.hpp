#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "losplan/geometry.hpp"
#include "losplan/network_planner.hpp"
#include "losplan/placement.hpp"
#include "losplan/thz_channel.hpp"

namespace losplan {

/// Parse or validation failure. `line` is 1-based, 0 when unknown.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string field, int line, const std::string& message);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

// Scenario values are kept in file units (meters, degrees, GHz, dBm, dBi) so
// that load/save round trips are exact; conversion happens in the builders.

struct BlockSpec {
  double x = 0.0;
  double y = 0.0;
  double base = 0.0;
  double height = 0.0;  // absolute roof elevation
  int sides = 4;
  double width = 0.0;   // cuboid extent along the rotated x axis
  double length = 0.0;  // cuboid extent along the rotated y axis
  double radius = 0.0;  // circumradius of a regular polygon (sides != 4 or width == 0)
  double rotation_deg = 0.0;
  friend bool operator==(const BlockSpec&, const BlockSpec&) = default;
};

struct RandomBlockSpec {
  int count = 0;
  double footprint_min = 10.0;
  double footprint_max = 30.0;
  double height_mean = 40.0;
  double height_spread = 30.0;  // heights uniform in mean +- spread
  double rotation_min_deg = 0.0;
  double rotation_max_deg = 90.0;
  int sides = 4;
  friend bool operator==(const RandomBlockSpec&, const RandomBlockSpec&) = default;
};

struct SceneSpec {
  double dx = 500.0;
  double dy = 500.0;
  double h_max = 200.0;
  std::vector<double> ground_heights;  // row-major nx*ny, empty for flat ground
  std::vector<BlockSpec> blocks;
  std::optional<RandomBlockSpec> random;
  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

struct GridSpec {
  int nx = 100;
  int ny = 100;
  int nux = 50;
  int nuy = 50;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct RandomNodeSpec {
  int count = 0;
  bool on_roof = false;
  friend bool operator==(const RandomNodeSpec&, const RandomNodeSpec&) = default;
};

struct NodeSpec {
  std::vector<Point3> positions;
  std::optional<RandomNodeSpec> random;
  friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

struct UavSpec {
  int count = 1;
  double altitude = 100.0;
  std::vector<Point3> positions;  // explicit UAVs for the coverage command
  friend bool operator==(const UavSpec&, const UavSpec&) = default;
};

struct ChannelSpec {
  double frequency_ghz = 188.0;
  double tx_power_dbm = 6.989700043360188;  // 5 mW
  double noise_dbm = -85.0;
  double gain_tx_dbi = 30.0;
  double gain_rx_dbi = 30.0;
  double temperature_c = 25.0;
  double pressure_hpa = 1013.25;
  double humidity_pct = 20.0;
  int antennas_per_uav = 1;  // recorded only; no formula uses it
  friend bool operator==(const ChannelSpec&, const ChannelSpec&) = default;
};

struct AlgorithmSpec {
  std::string name = "hybrid";  // greedy | ga | hybrid | geo | geokmeans
  int population = 40;
  int elite = 4;
  int crossover = 24;
  int mutation = 12;
  int iterations = 50;
  int greedy_descents = 2;
  int greedy_pool = 8;
  int greedy_starts = 1;
  double mutation_sigma_cells = 0.0;
  std::uint64_t max_evals = 0;
  int restarts = 50;
  bool exclude_footprint = false;
  bool require_feasible = true;
  friend bool operator==(const AlgorithmSpec&, const AlgorithmSpec&) = default;
};

struct SweepSpec {
  std::string axis = "n_uav";  // n_uav | altitude
  std::vector<double> values;
  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct Scenario {
  std::uint64_t seed = 1;
  GridSpec grid;
  SceneSpec scene;
  NodeSpec nodes;
  UavSpec uav;
  ChannelSpec channel;
  AlgorithmSpec algorithm;
  SweepSpec sweep;
  friend bool operator==(const Scenario&, const Scenario&) = default;

  /// Throws ScenarioError naming the violated field.
  void validate() const;
};

bool is_known_algorithm(std::string_view name);

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);
/// Canonical text form; parse_scenario(to_yaml(s)) == s.
std::string to_yaml(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// Named sub-stream of the master seed ("scene", "nodes", "search").
std::uint64_t sub_seed(std::uint64_t master, std::string_view stream);

/// Explicit blocks plus `spec.random` blocks drawn from `seed`.
Scene generate_scene(const SceneSpec& spec, const GridSpec& grid, std::uint64_t seed);
Scene build_scene(const Scenario& scenario);

/// Explicit nodes plus random nodes rejection-sampled outside footprints (or
/// anywhere with roof elevation when on_roof is set).
GroundNodeSet generate_nodes(const NodeSpec& spec, const Scene& scene, std::uint64_t seed);
GroundNodeSet build_nodes(const Scenario& scenario, const Scene& scene);

LinkParams link_params(const ChannelSpec& channel);
Atmosphere atmosphere(const ChannelSpec& channel);
GaConfig ga_config(const AlgorithmSpec& algorithm, std::uint64_t seed);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace losplan
