#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "losplan/geometry.hpp"
#include "losplan/los_engine.hpp"

namespace losplan {

/// 1-based cell of the UAV candidate grid A.
struct UavCell {
  int i = 1;
  int j = 1;
  friend auto operator<=>(const UavCell&, const UavCell&) = default;
};

using Layout = std::vector<UavCell>;

/// Candidate plane A at a fixed altitude.
struct UavPlane {
  int nux = 1;
  int nuy = 1;
  double step_x = 1.0;
  double step_y = 1.0;
  double h_u = 0.0;

  static UavPlane from_scene(const Scene& scene, double h_u);

  bool contains(const UavCell& c) const { return c.i >= 1 && c.i <= nux && c.j >= 1 && c.j <= nuy; }
  Point3 point(const UavCell& c) const { return {c.i * step_x, c.j * step_y, h_u}; }
  std::vector<Point3> points(std::span<const UavCell> layout) const;
  /// Nearest grid cell to (x, y), clamped into the grid.
  UavCell nearest(double x, double y) const;
};

struct PlacementState {
  Layout cells;
  std::vector<Point3> positions;
  double objective = -std::numeric_limits<double>::infinity();
  std::uint64_t eval_count = 0;
};

/// Result of one objective evaluation. Objectives that repair the layout
/// (e.g. cluster-driven repositioning) report the layout the value belongs to.
struct Evaluation {
  double value = -std::numeric_limits<double>::infinity();
  std::optional<Layout> repaired;
};

/// Deterministic, thread-safe map from a UAV layout to a scalar to maximize.
using ObjectiveFn = std::function<Evaluation(std::span<const UavCell>)>;

struct TracePoint {
  double wall_seconds = 0.0;
  std::uint64_t eval_count = 0;
  double best_objective = 0.0;
};

/// Convergence recorder shared by the search drivers.
class SearchMonitor {
 public:
  using Callback = std::function<void(const TracePoint&)>;
  explicit SearchMonitor(Callback on_point = {});

  void record(std::uint64_t eval_count, double best_objective);
  const std::vector<TracePoint>& trace() const { return trace_; }

 private:
  std::chrono::steady_clock::time_point start_;
  Callback on_point_;
  std::vector<TracePoint> trace_;
};

struct SearchOptions {
  int threads = 1;
  /// Stop starting new sweeps/generations once this many evaluations are
  /// spent; 0 means unlimited.
  std::uint64_t max_evals = 0;
  /// Guard for greedy descents under repairing objectives.
  std::uint64_t max_greedy_steps = 100000;
  SearchMonitor* monitor = nullptr;
};

struct GreedyAction {
  int uav = 0;
  int di = 0;
  int dj = 0;
  double dx = 0.0;
  double dy = 0.0;

  bool is_stay() const { return di == 0 && dj == 0; }
};

/// 5 * n_uav single-UAV moves, UAV-major, each UAV in the order stay, +x, -x, +y, -y.
std::vector<GreedyAction> greedy_actions(int n_uav, double step_x, double step_y);

struct GaConfig {
  int population = 40;
  int elite = 4;
  int crossover = 24;
  int mutation = 12;
  int iterations = 50;
  int greedy_descents = 2;
  int greedy_pool = 8;
  std::uint64_t rng_seed = 1;
  /// 0: mutation re-samples one UAV uniformly in A. >0: Gaussian step of
  /// this many cells (rounded, clamped to A).
  double mutation_sigma_cells = 0.0;

  void validate() const;
};

/// Steepest-ascent local search over the 5*N_u neighbourhood. Moves leaving A
/// score -inf. Stops when the best action is a stay; ties go to the lowest UAV
/// index, then to the action order. eval_count grows by 5*N_u per sweep.
PlacementState greedy_descend(const PlacementState& start, const ObjectiveFn& objective, const UavPlane& plane,
                              const SearchOptions& options = {});

/// Best local optimum over n_starts uniform random starts.
PlacementState greedy_multistart(const ObjectiveFn& objective, const UavPlane& plane, int n_uav, int n_starts,
                                 std::uint64_t rng_seed, const SearchOptions& options = {});

/// Elitist GA with roulette selection, per-UAV uniform crossover and
/// single-slot mutation. Costs population * iterations evaluations.
PlacementState ga_search(const GaConfig& config, const ObjectiveFn& objective, const UavPlane& plane, int n_uav,
                         const SearchOptions& options = {});

/// GA plus, every generation, greedy descents from `greedy_descents` distinct
/// columns drawn uniformly from the `greedy_pool` fittest; each descent result
/// replaces its start column before selection.
PlacementState hybrid_search(const GaConfig& config, const ObjectiveFn& objective, const UavPlane& plane,
                             int n_uav, const SearchOptions& options = {});

/// LoS coverage percentage of the union of per-UAV grids. Per-cell grids are
/// memoized, so revisiting a cell costs only the union.
class CoverageObjective {
 public:
  CoverageObjective(const LosEngine& engine, double h_u, bool exclude_footprint_cells = false,
                    std::size_t cache_capacity = 4096);

  Evaluation operator()(std::span<const UavCell> layout) const;
  CoverageGrid grid(std::span<const UavCell> layout) const;
  double percent(const CoverageGrid& grid) const;
  const UavPlane& plane() const { return plane_; }
  ObjectiveFn as_function() const;

 private:
  std::shared_ptr<const BitMatrix> cell_grid(const UavCell& cell) const;

  const LosEngine* engine_;
  UavPlane plane_;
  bool exclude_footprint_;
  BitMatrix footprint_;
  std::size_t capacity_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::uint64_t, std::shared_ptr<const BitMatrix>> cache_;
};

}  // namespace losplan
