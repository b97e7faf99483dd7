#include "commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "losplan/parallel.hpp"
#include "losplan/report.hpp"

namespace losplan::cli {

namespace {

bool is_network_algorithm(const std::string& name) { return name == "geo" || name == "geokmeans"; }

SearchMonitor make_monitor(const ProgressFn& progress) {
  auto generation = std::make_shared<int>(0);
  return SearchMonitor([progress, generation](const TracePoint& p) {
    ++*generation;
    if (progress) progress(p, *generation);
  });
}

PlacementState drive_search(const Scenario& s, const ObjectiveFn& objective, const UavPlane& plane, int threads,
                            SearchMonitor& monitor) {
  const AlgorithmSpec& a = s.algorithm;
  const std::uint64_t seed = sub_seed(s.seed, "search");
  SearchOptions opt;
  opt.threads = threads;
  opt.max_evals = a.max_evals;
  opt.monitor = &monitor;
  if (a.name == "greedy") return greedy_multistart(objective, plane, s.uav.count, a.greedy_starts, seed, opt);
  if (a.name == "ga") return ga_search(ga_config(a, seed), objective, plane, s.uav.count, opt);
  return hybrid_search(ga_config(a, seed), objective, plane, s.uav.count, opt);
}

// Keeps the plan behind the best evaluation; equal values resolve to the
// smallest repaired layout so the choice does not depend on thread timing.
class BestPlanTracker {
 public:
  explicit BestPlanTracker(const NetworkObjective& objective) : objective_(&objective) {}

  Evaluation operator()(std::span<const UavCell> layout) {
    ClusterPlan plan;
    Evaluation e = objective_->evaluate(layout, &plan);
    if (!e.repaired) return e;
    std::lock_guard lock(mutex_);
    if (!best_ || e.value > best_value_ || (e.value == best_value_ && *e.repaired < best_layout_)) {
      best_value_ = e.value;
      best_layout_ = *e.repaired;
      best_ = std::move(plan);
    }
    return e;
  }

  const std::optional<ClusterPlan>& best() const { return best_; }

 private:
  const NetworkObjective* objective_;
  std::mutex mutex_;
  std::optional<ClusterPlan> best_;
  double best_value_ = 0.0;
  Layout best_layout_;
};

std::string scenario_digest(const Scenario& s) { return sha256_hex(to_yaml(s)); }

std::string metadata(const std::string& command, const Scenario& s) {
  nlohmann::ordered_json m;
  m["command"] = command;
  m["seed"] = s.seed;
  m["algorithm"] = s.algorithm.name;
  m["uavs"] = s.uav.count;
  m["altitude"] = s.uav.altitude;
  m["scenario_sha256"] = scenario_digest(s);
  return m.dump();
}

ProgressFn stderr_progress(std::ostream& err, bool quiet) {
  if (quiet) return {};
  return [&err](const TracePoint& p, int gen) {
    err << "progress eval=" << p.eval_count << " best=" << format_double(p.best_objective) << " gen=" << gen << '\n';
  };
}

int cmd_coverage(const Scenario& s, ReportWriter& report, std::ostream& out) {
  if (s.uav.positions.empty()) throw std::invalid_argument("coverage: scenario lists no uav.positions");
  const Scene scene = build_scene(s);
  const LosEngine engine(scene);
  std::vector<CoverageGrid> grids;
  std::ostringstream yaml;
  yaml << "uavs:\n";
  for (const Point3& p : s.uav.positions) {
    grids.push_back(engine.coverage(p));
    yaml << "  - {position: [" << format_double(p.x) << ", " << format_double(p.y) << ", " << format_double(p.z)
         << "], coverage_percent: " << format_double(coverage_percent(grids.back())) << "}\n";
  }
  const CoverageGrid un = union_coverage(grids);
  const double pct = coverage_percent(un);
  yaml << "coverage_percent: " << format_double(pct) << "\n";
  yaml << "nlos_percent: " << format_double(100.0 - pct) << "\n";
  report.write_coverage("coverage", un.bits);
  report.write("coverage.yaml", yaml.str());
  out << "coverage_percent=" << format_double(pct) << '\n';
  return 0;
}

int cmd_place(const Scenario& s, int threads, ReportWriter& report, std::ostream& out, const ProgressFn& progress) {
  const Scene scene = build_scene(s);
  const PlaceResult r = run_place(s, scene, threads, progress);
  report.write_coverage("coverage", r.grid.bits);
  report.write("placement.yaml", placement_yaml(r.state, r.coverage_percent, s.algorithm.name));
  report.write_convergence("convergence.csv", r.trace);
  out << "coverage_percent=" << format_double(r.coverage_percent)
      << " nlos_percent=" << format_double(100.0 - r.coverage_percent) << " evals=" << r.state.eval_count << '\n';
  return 0;
}

int cmd_plan(const Scenario& s, int threads, ReportWriter& report, std::ostream& out, const ProgressFn& progress) {
  const Scene scene = build_scene(s);
  const GroundNodeSet nodes = build_nodes(s, scene);
  const PlanResult r = run_plan(s, scene, nodes, threads, progress);
  report.write("plan.yaml", plan_yaml(r.plan, nodes, s.algorithm.name, r.eval_count));
  for (std::size_t n = 0; n < r.plan.feasible_regions.size(); ++n) {
    report.write("region_" + std::to_string(n) + ".pgm", to_pgm(r.plan.feasible_regions[n]));
  }
  report.write_convergence("convergence.csv", r.trace);
  out << "avg_capacity=" << format_double(r.plan.avg_capacity) << " all_los=" << (r.plan.all_los ? "true" : "false")
      << " evals=" << r.eval_count << '\n';
  return s.algorithm.require_feasible && !r.plan.all_los ? 2 : 0;
}

int cmd_sweep(const Scenario& s, int threads, ReportWriter& report, std::ostream& out, const ProgressFn& progress) {
  if (s.sweep.values.empty()) throw std::invalid_argument("sweep: scenario lists no sweep.values");
  const bool network = is_network_algorithm(s.algorithm.name);
  std::string csv = network ? "value,avg_capacity,all_los,eval_count\n"
                            : "value,coverage_percent,nlos_percent,eval_count\n";
  for (double v : s.sweep.values) {
    Overrides o;
    if (s.sweep.axis == "n_uav") {
      o.uavs = static_cast<int>(v);
    } else {
      o.altitude = v;
    }
    const Scenario point = apply_overrides(s, o);
    const Scene scene = build_scene(point);
    csv += format_double(v) + ",";
    if (network) {
      const PlanResult r = run_plan(point, scene, build_nodes(point, scene), threads, progress);
      csv += format_double(r.plan.avg_capacity) + "," + (r.plan.all_los ? "true" : "false") + "," +
             std::to_string(r.eval_count) + "\n";
    } else {
      const PlaceResult r = run_place(point, scene, threads, progress);
      csv += format_double(r.coverage_percent) + "," + format_double(100.0 - r.coverage_percent) + "," +
             std::to_string(r.state.eval_count) + "\n";
    }
  }
  report.write("sweep.csv", csv);
  out << csv;
  return 0;
}

}  // namespace

Scenario apply_overrides(Scenario s, const Overrides& o) {
  if (o.seed) s.seed = *o.seed;
  if (o.algorithm) s.algorithm.name = *o.algorithm;
  if (o.uavs) s.uav.count = *o.uavs;
  if (o.altitude) s.uav.altitude = *o.altitude;
  s.validate();
  return s;
}

int thread_count(std::optional<int> requested) {
  if (requested && *requested < 1) throw std::invalid_argument("--threads must be at least 1");
  return resolve_thread_count(requested.value_or(0));
}

PlaceResult run_place(const Scenario& s, const Scene& scene, int threads, const ProgressFn& progress) {
  if (is_network_algorithm(s.algorithm.name)) {
    throw std::invalid_argument("place: algorithm '" + s.algorithm.name + "' plans networks; use the plan command");
  }
  const LosEngine engine(scene);
  const CoverageObjective objective(engine, s.uav.altitude, s.algorithm.exclude_footprint);
  SearchMonitor monitor = make_monitor(progress);
  PlaceResult r;
  r.state = drive_search(s, objective.as_function(), objective.plane(), threads, monitor);
  r.grid = objective.grid(r.state.cells);
  r.coverage_percent = objective.percent(r.grid);
  r.trace = monitor.trace();
  return r;
}

PlanResult run_plan(const Scenario& s, const Scene& scene, const GroundNodeSet& nodes, int threads,
                    const ProgressFn& progress) {
  const LosEngine engine(scene);
  const PlanContext ctx(engine, nodes, link_params(s.channel), atmosphere(s.channel), s.uav.altitude, threads);
  PlanResult r;
  if (s.algorithm.name == "geokmeans") {
    r.plan = geo_kmeans_plan(ctx, s.uav.count, s.algorithm.restarts, sub_seed(s.seed, "search"));
    r.eval_count = static_cast<std::uint64_t>(s.algorithm.restarts);
    SearchMonitor monitor = make_monitor(progress);
    monitor.record(r.eval_count, r.plan.avg_capacity);
    r.trace = monitor.trace();
    return r;
  }
  const NetworkObjective objective(ctx, sub_seed(s.seed, "repair"));
  BestPlanTracker tracker(objective);
  const ObjectiveFn fn = [&tracker](std::span<const UavCell> layout) { return tracker(layout); };
  SearchMonitor monitor = make_monitor(progress);
  const PlacementState state = drive_search(s, fn, ctx.plane(), threads, monitor);
  if (!tracker.best()) throw std::runtime_error("plan: search produced no evaluations");
  r.plan = *tracker.best();
  const auto members = r.plan.clusters();
  r.plan.feasible_regions.clear();
  for (const auto& m : members) r.plan.feasible_regions.push_back(ctx.acceptable_region(m));
  r.eval_count = state.eval_count;
  r.trace = monitor.trace();
  return r;
}

int run_command(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const Scenario s = apply_overrides(load_scenario(options.scenario), options.overrides);
    const int threads = thread_count(options.threads);
    if (options.out.empty()) throw std::invalid_argument("--out is required");
    ReportWriter report(options.out);
    report.write("scenario.yaml", to_yaml(s));
    const ProgressFn progress = stderr_progress(err, options.quiet);
    int status = 0;
    if (options.command == "coverage") {
      status = cmd_coverage(s, report, out);
    } else if (options.command == "place") {
      status = cmd_place(s, threads, report, out, progress);
    } else if (options.command == "plan") {
      status = cmd_plan(s, threads, report, out, progress);
    } else if (options.command == "sweep") {
      status = cmd_sweep(s, threads, report, out, progress);
    } else {
      throw std::invalid_argument("unknown command '" + options.command + "'");
    }
    report.write_manifest(metadata(options.command, s));
    return status;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Line-of-sight UAV placement and network planning"};
  app.require_subcommand(1);
  CommandOptions options;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> algorithm;
  std::optional<int> uavs;
  std::optional<double> altitude;
  const std::vector<std::string> algorithms{"greedy", "ga", "hybrid", "geo", "geokmeans"};
  const std::pair<const char*, const char*> commands[] = {
      {"coverage", "LoS map for the UAVs listed in the scenario"},
      {"place", "Search UAV positions maximizing LoS coverage"},
      {"plan", "Cluster ground nodes and position UAVs for capacity"},
      {"sweep", "Repeat place or plan over sweep.values"}};
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--scenario", options.scenario, "Scenario YAML file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", options.out, "Report directory")->required();
    sub->add_option("--seed", seed, "Master seed override");
    sub->add_option("--algorithm", algorithm, "Search algorithm")->check(CLI::IsMember(algorithms));
    sub->add_option("--uavs", uavs, "Number of UAVs")->check(CLI::PositiveNumber);
    sub->add_option("--altitude", altitude, "UAV altitude in meters")->check(CLI::PositiveNumber);
    sub->add_option("--threads", options.threads, "Worker threads (default: LOS_PLANNER_THREADS)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", options.quiet, "Suppress progress lines");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }
  options.command = app.get_subcommands().front()->get_name();
  options.overrides = {seed, algorithm, uavs, altitude};
  return run_command(options, out, err);
}

}  // namespace losplan::cli
