#include "losplan/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace losplan {

namespace {

constexpr std::array kAlgorithms{"greedy", "ga", "hybrid", "geo", "geokmeans"};

int line_of(const YAML::Node& node) {
  const YAML::Mark m = node.Mark();
  return m.is_null() ? 0 : m.line + 1;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void require_map(const YAML::Node& node, const std::string& path) {
  if (!node.IsMap()) throw ScenarioError(path, line_of(node), "expected a mapping");
}

void reject_unknown(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> known) {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ScenarioError(join(path, key), line_of(kv.first), "unknown key");
  }
}

template <typename T>
T convert(const YAML::Node& node, const std::string& path, const char* what) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ScenarioError(path, line_of(node), std::string("expected ") + what);
  }
}

template <typename T>
void read(const YAML::Node& parent, const std::string& path, const char* key, T& out, const char* what) {
  const YAML::Node node = parent[key];
  if (!node || node.IsNull()) return;
  out = convert<T>(node, join(path, key), what);
}

void read_double(const YAML::Node& parent, const std::string& path, const char* key, double& out) {
  read(parent, path, key, out, "a number");
  if (!std::isfinite(out)) throw ScenarioError(join(path, key), line_of(parent[key]), "must be finite");
}

std::vector<double> read_numbers(const YAML::Node& node, const std::string& path, std::size_t arity) {
  if (!node.IsSequence() || (arity != 0 && node.size() != arity)) {
    throw ScenarioError(path, line_of(node),
                        arity ? "expected a list of " + std::to_string(arity) + " numbers" : "expected a list");
  }
  std::vector<double> out;
  out.reserve(node.size());
  for (std::size_t k = 0; k < node.size(); ++k) {
    out.push_back(convert<double>(node[k], path + "[" + std::to_string(k) + "]", "a number"));
  }
  return out;
}

std::vector<Point3> read_points(const YAML::Node& parent, const std::string& path, const char* key) {
  const YAML::Node node = parent[key];
  std::vector<Point3> out;
  if (!node || node.IsNull()) return out;
  const std::string p = join(path, key);
  if (!node.IsSequence()) throw ScenarioError(p, line_of(node), "expected a list of [x, y, z]");
  for (std::size_t k = 0; k < node.size(); ++k) {
    const std::vector<double> v = read_numbers(node[k], p + "[" + std::to_string(k) + "]", 3);
    out.push_back({v[0], v[1], v[2]});
  }
  return out;
}

BlockSpec parse_block(const YAML::Node& node, const std::string& path) {
  require_map(node, path);
  reject_unknown(node, path, {"center", "base", "height", "sides", "size", "radius", "rotation_deg"});
  BlockSpec b;
  if (!node["center"]) throw ScenarioError(join(path, "center"), line_of(node), "missing");
  const std::vector<double> c = read_numbers(node["center"], join(path, "center"), 2);
  b.x = c[0];
  b.y = c[1];
  read_double(node, path, "base", b.base);
  if (!node["height"]) throw ScenarioError(join(path, "height"), line_of(node), "missing");
  read_double(node, path, "height", b.height);
  read(node, path, "sides", b.sides, "an integer");
  if (node["size"]) {
    const std::vector<double> s = read_numbers(node["size"], join(path, "size"), 2);
    b.width = s[0];
    b.length = s[1];
  }
  read_double(node, path, "radius", b.radius);
  read_double(node, path, "rotation_deg", b.rotation_deg);
  return b;
}

SceneSpec parse_scene(const YAML::Node& node, const std::string& path) {
  SceneSpec s;
  if (!node) return s;
  require_map(node, path);
  reject_unknown(node, path, {"dx", "dy", "h_max", "ground_heights", "blocks", "random"});
  read_double(node, path, "dx", s.dx);
  read_double(node, path, "dy", s.dy);
  read_double(node, path, "h_max", s.h_max);
  if (node["ground_heights"]) s.ground_heights = read_numbers(node["ground_heights"], join(path, "ground_heights"), 0);
  if (const YAML::Node blocks = node["blocks"]; blocks && !blocks.IsNull()) {
    if (!blocks.IsSequence()) throw ScenarioError(join(path, "blocks"), line_of(blocks), "expected a list");
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      s.blocks.push_back(parse_block(blocks[k], join(path, "blocks") + "[" + std::to_string(k) + "]"));
    }
  }
  if (const YAML::Node r = node["random"]; r && !r.IsNull()) {
    const std::string rp = join(path, "random");
    require_map(r, rp);
    reject_unknown(r, rp,
                   {"count", "footprint_min", "footprint_max", "height_mean", "height_spread", "rotation_min_deg",
                    "rotation_max_deg", "sides"});
    RandomBlockSpec spec;
    read(r, rp, "count", spec.count, "an integer");
    read_double(r, rp, "footprint_min", spec.footprint_min);
    read_double(r, rp, "footprint_max", spec.footprint_max);
    read_double(r, rp, "height_mean", spec.height_mean);
    read_double(r, rp, "height_spread", spec.height_spread);
    read_double(r, rp, "rotation_min_deg", spec.rotation_min_deg);
    read_double(r, rp, "rotation_max_deg", spec.rotation_max_deg);
    read(r, rp, "sides", spec.sides, "an integer");
    s.random = spec;
  }
  return s;
}

Scenario from_node(const YAML::Node& root) {
  Scenario s;
  if (!root || root.IsNull()) return s;
  require_map(root, "");
  reject_unknown(root, "", {"seed", "grid", "scene", "nodes", "uav", "channel", "algorithm", "sweep"});
  read(root, "", "seed", s.seed, "a non-negative integer");

  if (const YAML::Node g = root["grid"]) {
    require_map(g, "grid");
    reject_unknown(g, "grid", {"nx", "ny", "nux", "nuy"});
    read(g, "grid", "nx", s.grid.nx, "an integer");
    read(g, "grid", "ny", s.grid.ny, "an integer");
    read(g, "grid", "nux", s.grid.nux, "an integer");
    read(g, "grid", "nuy", s.grid.nuy, "an integer");
  }
  s.scene = parse_scene(root["scene"], "scene");

  if (const YAML::Node n = root["nodes"]) {
    require_map(n, "nodes");
    reject_unknown(n, "nodes", {"positions", "random"});
    s.nodes.positions = read_points(n, "nodes", "positions");
    if (const YAML::Node r = n["random"]; r && !r.IsNull()) {
      require_map(r, "nodes.random");
      reject_unknown(r, "nodes.random", {"count", "on_roof"});
      RandomNodeSpec spec;
      read(r, "nodes.random", "count", spec.count, "an integer");
      read(r, "nodes.random", "on_roof", spec.on_roof, "a boolean");
      s.nodes.random = spec;
    }
  }
  if (const YAML::Node u = root["uav"]) {
    require_map(u, "uav");
    reject_unknown(u, "uav", {"count", "altitude", "positions"});
    read(u, "uav", "count", s.uav.count, "an integer");
    read_double(u, "uav", "altitude", s.uav.altitude);
    s.uav.positions = read_points(u, "uav", "positions");
  }
  if (const YAML::Node c = root["channel"]) {
    require_map(c, "channel");
    reject_unknown(c, "channel",
                   {"frequency_ghz", "tx_power_dbm", "noise_dbm", "gain_tx_dbi", "gain_rx_dbi", "temperature_c",
                    "pressure_hpa", "humidity_pct", "antennas_per_uav"});
    read_double(c, "channel", "frequency_ghz", s.channel.frequency_ghz);
    read_double(c, "channel", "tx_power_dbm", s.channel.tx_power_dbm);
    read_double(c, "channel", "noise_dbm", s.channel.noise_dbm);
    read_double(c, "channel", "gain_tx_dbi", s.channel.gain_tx_dbi);
    read_double(c, "channel", "gain_rx_dbi", s.channel.gain_rx_dbi);
    read_double(c, "channel", "temperature_c", s.channel.temperature_c);
    read_double(c, "channel", "pressure_hpa", s.channel.pressure_hpa);
    read_double(c, "channel", "humidity_pct", s.channel.humidity_pct);
    read(c, "channel", "antennas_per_uav", s.channel.antennas_per_uav, "an integer");
  }
  if (const YAML::Node a = root["algorithm"]) {
    const std::string p = "algorithm";
    require_map(a, p);
    reject_unknown(a, p,
                   {"name", "population", "elite", "crossover", "mutation", "iterations", "greedy_descents",
                    "greedy_pool", "greedy_starts", "mutation_sigma_cells", "max_evals", "restarts",
                    "exclude_footprint", "require_feasible"});
    AlgorithmSpec& al = s.algorithm;
    read(a, p, "name", al.name, "a string");
    read(a, p, "population", al.population, "an integer");
    read(a, p, "elite", al.elite, "an integer");
    read(a, p, "crossover", al.crossover, "an integer");
    read(a, p, "mutation", al.mutation, "an integer");
    read(a, p, "iterations", al.iterations, "an integer");
    read(a, p, "greedy_descents", al.greedy_descents, "an integer");
    read(a, p, "greedy_pool", al.greedy_pool, "an integer");
    read(a, p, "greedy_starts", al.greedy_starts, "an integer");
    read_double(a, p, "mutation_sigma_cells", al.mutation_sigma_cells);
    read(a, p, "max_evals", al.max_evals, "a non-negative integer");
    read(a, p, "restarts", al.restarts, "an integer");
    read(a, p, "exclude_footprint", al.exclude_footprint, "a boolean");
    read(a, p, "require_feasible", al.require_feasible, "a boolean");
  }
  if (const YAML::Node w = root["sweep"]) {
    require_map(w, "sweep");
    reject_unknown(w, "sweep", {"axis", "values"});
    read(w, "sweep", "axis", s.sweep.axis, "a string");
    if (w["values"]) s.sweep.values = read_numbers(w["values"], "sweep.values", 0);
  }
  return s;
}

void emit_point(YAML::Emitter& out, const Point3& p) {
  out << YAML::Flow << YAML::BeginSeq << format_double(p.x) << format_double(p.y) << format_double(p.z)
      << YAML::EndSeq;
}

void emit_points(YAML::Emitter& out, const std::vector<Point3>& points) {
  out << YAML::BeginSeq;
  for (const Point3& p : points) emit_point(out, p);
  out << YAML::EndSeq;
}

template <typename T>
void kv(YAML::Emitter& out, const char* key, const T& value) {
  out << YAML::Key << key << YAML::Value << value;
}

void kvd(YAML::Emitter& out, const char* key, double value) { kv(out, key, format_double(value)); }

[[noreturn]] void invalid(const std::string& field, const std::string& message) {
  throw ScenarioError(field, 0, message);
}

}  // namespace

ScenarioError::ScenarioError(std::string field, int line, const std::string& message)
    : std::runtime_error((field.empty() ? std::string("scenario") : field) + ": " + message +
                         (line > 0 ? " (line " + std::to_string(line) + ")" : std::string())),
      field_(std::move(field)),
      line_(line) {}

bool is_known_algorithm(std::string_view name) {
  for (const char* a : kAlgorithms) {
    if (name == a) return true;
  }
  return false;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  std::string s(buf.data(), end);
  // Keep a decimal point or exponent so the value reads back as a float.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void Scenario::validate() const {
  if (grid.nx < 1 || grid.ny < 1) invalid("grid", "nx and ny must be positive");
  if (grid.nux < 1 || grid.nuy < 1) invalid("grid", "nux and nuy must be positive");
  if (!(scene.dx > 0.0) || !(scene.dy > 0.0)) invalid("scene", "dx and dy must be positive");
  if (!(scene.h_max > 0.0)) invalid("scene.h_max", "must be positive");
  if (!scene.ground_heights.empty()) {
    if (scene.ground_heights.size() != static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny)) {
      invalid("scene.ground_heights", "must hold nx*ny values");
    }
    if (scene.ground_heights[0] != 0.0) invalid("scene.ground_heights", "reference cell (1,1) must be 0");
  }
  for (std::size_t k = 0; k < scene.blocks.size(); ++k) {
    const BlockSpec& b = scene.blocks[k];
    const std::string f = "scene.blocks[" + std::to_string(k) + "]";
    if (!(b.height > b.base)) invalid(f, "block " + std::to_string(k) + ": height must exceed base");
    if (b.sides < 3) invalid(f, "block " + std::to_string(k) + ": needs at least 3 sides");
    const bool cuboid = b.sides == 4 && b.radius == 0.0;
    if (cuboid && (!(b.width > 0.0) || !(b.length > 0.0))) {
      invalid(f, "block " + std::to_string(k) + ": size must be positive");
    }
    if (!cuboid && !(b.radius > 0.0)) invalid(f, "block " + std::to_string(k) + ": radius must be positive");
  }
  if (scene.random) {
    const RandomBlockSpec& r = *scene.random;
    if (r.count < 0) invalid("scene.random.count", "must be non-negative");
    if (!(r.footprint_min > 0.0) || r.footprint_max < r.footprint_min) {
      invalid("scene.random", "footprint range must satisfy 0 < min <= max");
    }
    if (r.height_spread < 0.0 || !(r.height_mean - r.height_spread > 0.0)) {
      invalid("scene.random", "heights must satisfy mean - spread > 0 and spread >= 0");
    }
    if (r.rotation_max_deg < r.rotation_min_deg) invalid("scene.random", "rotation range is empty");
    if (r.sides < 3) invalid("scene.random.sides", "needs at least 3 sides");
  }
  for (std::size_t k = 0; k < nodes.positions.size(); ++k) {
    const Point3& p = nodes.positions[k];
    if (p.x < 0.0 || p.x > scene.dx || p.y < 0.0 || p.y > scene.dy) {
      invalid("nodes.positions[" + std::to_string(k) + "]", "node lies outside the scene");
    }
  }
  if (nodes.random && nodes.random->count < 0) invalid("nodes.random.count", "must be non-negative");
  if (uav.count < 1) invalid("uav.count", "must be at least 1");
  if (!(uav.altitude > 0.0)) invalid("uav.altitude", "must be positive");
  if (uav.altitude > scene.h_max) invalid("uav.altitude", "exceeds scene.h_max");
  for (std::size_t k = 0; k < uav.positions.size(); ++k) {
    if (uav.positions[k].z > scene.h_max) {
      invalid("uav.positions[" + std::to_string(k) + "]", "altitude exceeds scene.h_max");
    }
  }
  if (!(channel.frequency_ghz > 0.0)) invalid("channel.frequency_ghz", "must be positive");
  if (!(channel.pressure_hpa > 0.0)) invalid("channel.pressure_hpa", "must be positive");
  if (channel.humidity_pct < 0.0 || channel.humidity_pct > 100.0) {
    invalid("channel.humidity_pct", "must lie in [0, 100]");
  }
  if (channel.antennas_per_uav < 1) invalid("channel.antennas_per_uav", "must be at least 1");
  if (!is_known_algorithm(algorithm.name)) {
    invalid("algorithm.name", "unknown algorithm '" + algorithm.name + "'");
  }
  try {
    ga_config(algorithm, 0).validate();
  } catch (const std::invalid_argument& e) {
    invalid("algorithm", e.what());
  }
  if (algorithm.greedy_starts < 1) invalid("algorithm.greedy_starts", "must be at least 1");
  if (algorithm.restarts < 1) invalid("algorithm.restarts", "must be at least 1");
  if (sweep.axis != "n_uav" && sweep.axis != "altitude") invalid("sweep.axis", "must be n_uav or altitude");
  for (double v : sweep.values) {
    if (sweep.axis == "n_uav" && (v < 1.0 || v != std::floor(v))) {
      invalid("sweep.values", "UAV counts must be positive integers");
    }
    if (sweep.axis == "altitude" && (!(v > 0.0) || v > scene.h_max)) {
      invalid("sweep.values", "altitudes must lie in (0, h_max]");
    }
  }
}

Scenario parse_scenario(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ScenarioError("", e.mark.is_null() ? 0 : e.mark.line + 1, "parse error: " + e.msg);
  }
  Scenario s = from_node(root);
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("", 0, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string to_yaml(const Scenario& s) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  kv(out, "seed", s.seed);

  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  kv(out, "nx", s.grid.nx);
  kv(out, "ny", s.grid.ny);
  kv(out, "nux", s.grid.nux);
  kv(out, "nuy", s.grid.nuy);
  out << YAML::EndMap;

  out << YAML::Key << "scene" << YAML::Value << YAML::BeginMap;
  kvd(out, "dx", s.scene.dx);
  kvd(out, "dy", s.scene.dy);
  kvd(out, "h_max", s.scene.h_max);
  if (!s.scene.ground_heights.empty()) {
    out << YAML::Key << "ground_heights" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double h : s.scene.ground_heights) out << format_double(h);
    out << YAML::EndSeq;
  }
  out << YAML::Key << "blocks" << YAML::Value << YAML::BeginSeq;
  for (const BlockSpec& b : s.scene.blocks) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "center" << YAML::Value << YAML::Flow << YAML::BeginSeq << format_double(b.x)
        << format_double(b.y) << YAML::EndSeq;
    kvd(out, "base", b.base);
    kvd(out, "height", b.height);
    kv(out, "sides", b.sides);
    out << YAML::Key << "size" << YAML::Value << YAML::Flow << YAML::BeginSeq << format_double(b.width)
        << format_double(b.length) << YAML::EndSeq;
    kvd(out, "radius", b.radius);
    kvd(out, "rotation_deg", b.rotation_deg);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  if (s.scene.random) {
    const RandomBlockSpec& r = *s.scene.random;
    out << YAML::Key << "random" << YAML::Value << YAML::BeginMap;
    kv(out, "count", r.count);
    kvd(out, "footprint_min", r.footprint_min);
    kvd(out, "footprint_max", r.footprint_max);
    kvd(out, "height_mean", r.height_mean);
    kvd(out, "height_spread", r.height_spread);
    kvd(out, "rotation_min_deg", r.rotation_min_deg);
    kvd(out, "rotation_max_deg", r.rotation_max_deg);
    kv(out, "sides", r.sides);
    out << YAML::EndMap;
  }
  out << YAML::EndMap;

  out << YAML::Key << "nodes" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "positions" << YAML::Value;
  emit_points(out, s.nodes.positions);
  if (s.nodes.random) {
    out << YAML::Key << "random" << YAML::Value << YAML::BeginMap;
    kv(out, "count", s.nodes.random->count);
    kv(out, "on_roof", s.nodes.random->on_roof);
    out << YAML::EndMap;
  }
  out << YAML::EndMap;

  out << YAML::Key << "uav" << YAML::Value << YAML::BeginMap;
  kv(out, "count", s.uav.count);
  kvd(out, "altitude", s.uav.altitude);
  out << YAML::Key << "positions" << YAML::Value;
  emit_points(out, s.uav.positions);
  out << YAML::EndMap;

  out << YAML::Key << "channel" << YAML::Value << YAML::BeginMap;
  kvd(out, "frequency_ghz", s.channel.frequency_ghz);
  kvd(out, "tx_power_dbm", s.channel.tx_power_dbm);
  kvd(out, "noise_dbm", s.channel.noise_dbm);
  kvd(out, "gain_tx_dbi", s.channel.gain_tx_dbi);
  kvd(out, "gain_rx_dbi", s.channel.gain_rx_dbi);
  kvd(out, "temperature_c", s.channel.temperature_c);
  kvd(out, "pressure_hpa", s.channel.pressure_hpa);
  kvd(out, "humidity_pct", s.channel.humidity_pct);
  kv(out, "antennas_per_uav", s.channel.antennas_per_uav);
  out << YAML::EndMap;

  const AlgorithmSpec& a = s.algorithm;
  out << YAML::Key << "algorithm" << YAML::Value << YAML::BeginMap;
  kv(out, "name", a.name);
  kv(out, "population", a.population);
  kv(out, "elite", a.elite);
  kv(out, "crossover", a.crossover);
  kv(out, "mutation", a.mutation);
  kv(out, "iterations", a.iterations);
  kv(out, "greedy_descents", a.greedy_descents);
  kv(out, "greedy_pool", a.greedy_pool);
  kv(out, "greedy_starts", a.greedy_starts);
  kvd(out, "mutation_sigma_cells", a.mutation_sigma_cells);
  kv(out, "max_evals", a.max_evals);
  kv(out, "restarts", a.restarts);
  kv(out, "exclude_footprint", a.exclude_footprint);
  kv(out, "require_feasible", a.require_feasible);
  out << YAML::EndMap;

  out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
  kv(out, "axis", s.sweep.axis);
  out << YAML::Key << "values" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (double v : s.sweep.values) out << format_double(v);
  out << YAML::EndSeq;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream outf(path, std::ios::binary | std::ios::trunc);
  if (!outf) throw std::runtime_error("cannot write " + path.string());
  outf << to_yaml(scenario);
  if (!outf) throw std::runtime_error("write failed: " + path.string());
}

std::uint64_t sub_seed(std::uint64_t master, std::string_view stream) {
  std::uint32_t h = 2166136261u;  // FNV-1a
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 16777619u;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32), h};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Scene generate_scene(const SceneSpec& spec, const GridSpec& grid, std::uint64_t seed) {
  Scene scene;
  scene.dx = spec.dx;
  scene.dy = spec.dy;
  scene.nx = grid.nx;
  scene.ny = grid.ny;
  scene.nux = grid.nux;
  scene.nuy = grid.nuy;
  scene.h_max = spec.h_max;
  scene.ground_height = spec.ground_heights;
  constexpr double deg = std::numbers::pi / 180.0;
  for (const BlockSpec& b : spec.blocks) {
    if (b.sides == 4 && b.radius == 0.0) {
      scene.blocks.push_back(
          PrismBlock::cuboid(b.x, b.y, b.base, b.height, b.width, b.length, b.rotation_deg * deg));
    } else {
      scene.blocks.push_back(PrismBlock::polygon(b.x, b.y, b.base, b.height, b.sides, b.radius, b.rotation_deg * deg));
    }
  }
  if (spec.random) {
    const RandomBlockSpec& r = *spec.random;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, spec.dx);
    std::uniform_real_distribution<double> uy(0.0, spec.dy);
    std::uniform_real_distribution<double> usize(r.footprint_min, r.footprint_max);
    std::uniform_real_distribution<double> uh(r.height_mean - r.height_spread, r.height_mean + r.height_spread);
    std::uniform_real_distribution<double> urot(r.rotation_min_deg, r.rotation_max_deg);
    for (int k = 0; k < r.count; ++k) {
      const double cx = ux(rng);
      const double cy = uy(rng);
      const double sx = usize(rng);
      const double sy = usize(rng);
      const double h = uh(rng);
      const double rot = urot(rng) * deg;
      const double base = scene.ground_height.empty() ? 0.0 : scene.ground_near(cx, cy);
      if (r.sides == 4) {
        scene.blocks.push_back(PrismBlock::cuboid(cx, cy, base, base + h, sx, sy, rot));
      } else {
        scene.blocks.push_back(PrismBlock::polygon(cx, cy, base, base + h, r.sides, 0.5 * sx, rot));
      }
    }
  }
  scene.validate();
  return scene;
}

Scene build_scene(const Scenario& scenario) {
  return generate_scene(scenario.scene, scenario.grid, sub_seed(scenario.seed, "scene"));
}

GroundNodeSet generate_nodes(const NodeSpec& spec, const Scene& scene, std::uint64_t seed) {
  GroundNodeSet nodes;
  nodes.positions = spec.positions;
  if (!spec.random || spec.random->count == 0) return nodes;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, scene.dx);
  std::uniform_real_distribution<double> uy(0.0, scene.dy);
  const long long limit = 10000LL * spec.random->count + 10000;
  long long attempts = 0;
  int placed = 0;
  while (placed < spec.random->count) {
    if (++attempts > limit) throw std::runtime_error("nodes: could not place nodes outside block footprints");
    const double x = ux(rng);
    const double y = uy(rng);
    double z = scene.ground_height.empty() ? 0.0 : scene.ground_near(x, y);
    bool inside = false;
    for (const PrismBlock& b : scene.blocks) {
      if (footprint_contains(b, x, y)) {
        inside = true;
        z = std::max(z, b.height);
      }
    }
    if (inside && !spec.random->on_roof) continue;
    nodes.positions.push_back({x, y, z});
    ++placed;
  }
  return nodes;
}

GroundNodeSet build_nodes(const Scenario& scenario, const Scene& scene) {
  return generate_nodes(scenario.nodes, scene, sub_seed(scenario.seed, "nodes"));
}

LinkParams link_params(const ChannelSpec& c) {
  LinkParams link;
  link.frequency_hz = c.frequency_ghz * 1e9;
  link.tx_power_w = dbm_to_watts(c.tx_power_dbm);
  link.noise_power_w = dbm_to_watts(c.noise_dbm);
  link.gain_tx = db_to_linear(c.gain_tx_dbi);
  link.gain_rx = db_to_linear(c.gain_rx_dbi);
  return link;
}

Atmosphere atmosphere(const ChannelSpec& c) { return {c.temperature_c, c.pressure_hpa, c.humidity_pct}; }

GaConfig ga_config(const AlgorithmSpec& a, std::uint64_t seed) {
  GaConfig g;
  g.population = a.population;
  g.elite = a.elite;
  g.crossover = a.crossover;
  g.mutation = a.mutation;
  g.iterations = a.iterations;
  g.greedy_descents = a.greedy_descents;
  g.greedy_pool = a.greedy_pool;
  g.rng_seed = seed;
  g.mutation_sigma_cells = a.mutation_sigma_cells;
  return g;
}

}  // namespace losplan
