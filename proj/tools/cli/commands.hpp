#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "losplan/network_planner.hpp"
#include "losplan/placement.hpp"
#include "losplan/scenario.hpp"

namespace losplan::cli {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> algorithm;
  std::optional<int> uavs;
  std::optional<double> altitude;
};

/// Applies command-line overrides and re-validates.
Scenario apply_overrides(Scenario scenario, const Overrides& overrides);

/// --threads value if given, else LOS_PLANNER_THREADS, else hardware concurrency.
int thread_count(std::optional<int> requested);

using ProgressFn = std::function<void(const TracePoint&, int generation)>;

struct PlaceResult {
  PlacementState state;
  CoverageGrid grid;
  double coverage_percent = 0.0;
  std::vector<TracePoint> trace;
};

/// Coverage search (greedy multistart, ga or hybrid) for scenario.uav.count UAVs.
PlaceResult run_place(const Scenario& scenario, const Scene& scene, int threads, const ProgressFn& progress = {});

struct PlanResult {
  ClusterPlan plan;
  std::uint64_t eval_count = 0;
  std::vector<TracePoint> trace;
};

/// Network plan: geokmeans runs the k-means planner (one evaluation per
/// restart); every other algorithm drives the repositioning objective with
/// the matching search (geo uses the hybrid search).
PlanResult run_plan(const Scenario& scenario, const Scene& scene, const GroundNodeSet& nodes, int threads,
                    const ProgressFn& progress = {});

struct CommandOptions {
  std::string command;  // coverage | place | plan | sweep
  std::filesystem::path scenario;
  std::filesystem::path out;
  Overrides overrides;
  std::optional<int> threads;
  bool quiet = false;
};

/// Runs one command and writes its report under options.out.
/// Returns 0 on success, 2 when a plan's feasibility differs from
/// algorithm.require_feasible, 1 on errors (message on err).
int run_command(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Parses argv with CLI11 and dispatches to run_command.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace losplan::cli
