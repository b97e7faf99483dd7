#include "losplan/network_planner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "losplan/parallel.hpp"

namespace losplan {

namespace {

double dist2_xy(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

int nearest_uav(const Point3& node, std::span<const Point3> uavs) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < uavs.size(); ++n) {
    const double d = distance(node, uavs[n]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(n);
    }
  }
  return best;
}

void check_uavs(std::span<const Point3> uavs) {
  if (uavs.empty()) throw std::invalid_argument("planner: need at least one UAV");
  for (const Point3& u : uavs) {
    if (!is_finite(u)) throw std::invalid_argument("planner: UAV position must be finite");
  }
}

// Fills node_capacity / node_los / avg_capacity for a fixed assignment.
void score(const PlanContext& ctx, ClusterPlan& plan) {
  const std::size_t n = ctx.nodes().size();
  plan.node_capacity.assign(n, 0.0);
  plan.node_los.assign(n, false);
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Point3& u = plan.uav_positions[static_cast<std::size_t>(plan.assignment[k])];
    if (ctx.los(static_cast<int>(k), u)) {
      plan.node_los[k] = true;
      plan.node_capacity[k] = ctx.capacity(static_cast<int>(k), u);
      sum += plan.node_capacity[k];
    }
  }
  plan.avg_capacity = sum / static_cast<double>(n);
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  // splitmix64 finalizer over the running hash
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ull;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebull;
  h ^= h >> 31;
  return h;
}

std::mt19937_64 restart_rng(std::uint64_t seed, int restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart), std::uint32_t{0x6b6d6561u}};
  return std::mt19937_64(seq);
}

// Closest true cell of the region to (x, y); ties go to the lowest (i, j).
std::optional<UavCell> snap(const BitMatrix& region, const UavPlane& plane, double x, double y) {
  std::optional<UavCell> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int r = 0; r < region.rows(); ++r) {
    for (int c = 0; c < region.cols(); ++c) {
      if (!region.get(r, c)) continue;
      const Point3 p = plane.point({r + 1, c + 1});
      const double dx = p.x - x;
      const double dy = p.y - y;
      const double d = dx * dx + dy * dy;
      if (d < best_d) {
        best_d = d;
        best = UavCell{r + 1, c + 1};
      }
    }
  }
  return best;
}

struct KmeansRun {
  std::vector<Point3> centroids;
  std::vector<int> assignment;
};

std::vector<int> assign_xy(const std::vector<Point3>& nodes, const std::vector<Point3>& centroids) {
  std::vector<int> out(nodes.size(), 0);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < centroids.size(); ++n) {
      const double d = dist2_xy(nodes[k], centroids[n]);
      if (d < best) {
        best = d;
        out[k] = static_cast<int>(n);
      }
    }
  }
  return out;
}

// One assignment + update round. Empty clusters are re-seeded at the node
// farthest from its assigned centroid.
std::vector<Point3> kmeans_round(const std::vector<Point3>& nodes, const std::vector<Point3>& centroids,
                                 std::vector<int>& assignment) {
  assignment = assign_xy(nodes, centroids);
  const std::size_t m = centroids.size();
  std::vector<double> sx(m, 0.0), sy(m, 0.0);
  std::vector<int> count(m, 0);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto n = static_cast<std::size_t>(assignment[k]);
    sx[n] += nodes[k].x;
    sy[n] += nodes[k].y;
    ++count[n];
  }
  std::vector<Point3> next = centroids;
  for (std::size_t n = 0; n < m; ++n) {
    if (count[n] > 0) next[n] = {sx[n] / count[n], sy[n] / count[n], centroids[n].z};
  }
  std::vector<bool> taken(nodes.size(), false);
  for (std::size_t n = 0; n < m; ++n) {
    if (count[n] > 0) continue;
    double far = -1.0;
    std::size_t pick = nodes.size();
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (taken[k]) continue;
      const double d = dist2_xy(nodes[k], centroids[static_cast<std::size_t>(assignment[k])]);
      if (d > far) {
        far = d;
        pick = k;
      }
    }
    if (pick == nodes.size()) continue;
    taken[pick] = true;
    next[n] = {nodes[pick].x, nodes[pick].y, centroids[n].z};
  }
  return next;
}

KmeansRun kmeans(const std::vector<Point3>& nodes, std::vector<Point3> centroids, int max_iterations) {
  KmeansRun run;
  for (int it = 0; it < max_iterations; ++it) {
    std::vector<Point3> next = kmeans_round(nodes, centroids, run.assignment);
    if (next == centroids) break;
    centroids = std::move(next);
  }
  run.assignment = assign_xy(nodes, centroids);
  run.centroids = std::move(centroids);
  return run;
}

bool better(const ClusterPlan& a, const ClusterPlan& b) {
  if (a.all_los != b.all_los) return a.all_los;
  return a.avg_capacity > b.avg_capacity;
}

}  // namespace

void GroundNodeSet::validate(const Scene& scene) const {
  if (positions.empty()) throw std::invalid_argument("nodes: node set must be nonempty");
  for (std::size_t k = 0; k < positions.size(); ++k) {
    const Point3& p = positions[k];
    if (!is_finite(p) || p.x < 0.0 || p.x > scene.dx || p.y < 0.0 || p.y > scene.dy) {
      throw std::invalid_argument("nodes: node " + std::to_string(k) + " lies outside the scene");
    }
  }
}

std::vector<std::vector<int>> ClusterPlan::clusters() const {
  std::vector<std::vector<int>> out(uav_positions.size());
  for (std::size_t k = 0; k < assignment.size(); ++k) {
    out[static_cast<std::size_t>(assignment[k])].push_back(static_cast<int>(k));
  }
  return out;
}

PlanContext::PlanContext(const LosEngine& engine, GroundNodeSet nodes, LinkParams link, Atmosphere atm, double h_u,
                         int threads)
    : engine_(&engine),
      nodes_(std::move(nodes)),
      link_(link),
      atm_(atm),
      plane_(UavPlane::from_scene(engine.scene(), h_u)),
      threads_(resolve_thread_count(threads)) {
  nodes_.validate(engine.scene());
  link_.validate();
  mu_ = mixing_ratio(atm_);
  visibility_.resize(nodes_.size());
  parallel_for(nodes_.size(), threads_,
               [&](std::size_t k) { visibility_[k] = engine_->plane_visibility(nodes_.positions[k], h_u); });
}

bool PlanContext::los(int node, const Point3& uav) const {
  return !engine_->blocked(nodes_.positions[static_cast<std::size_t>(node)], uav);
}

BitMatrix PlanContext::acceptable_region(std::span<const int> members) const {
  BitMatrix region(plane_.nux, plane_.nuy, true);
  for (int k : members) {
    region &= node_visibility(k);
    if (!region.any()) break;
  }
  return region;
}

double PlanContext::capacity(int node, const Point3& uav) const {
  const double l = distance(nodes_.positions[static_cast<std::size_t>(node)], uav);
  if (!(l > 0.0)) throw std::invalid_argument("degenerate link");
  const double h = free_space_factor(link_.frequency_hz, l) * molecular_loss(link_.frequency_hz, mu_, l) *
                   std::sqrt(link_.gain_tx * link_.gain_rx);
  return link_capacity(link_, h);
}

double avg_network_capacity(const ClusterPlan& plan, const GroundNodeSet& nodes, const LinkParams& link,
                            const Atmosphere& atm) {
  if (nodes.positions.empty()) throw std::invalid_argument("capacity: node set must be nonempty");
  if (plan.assignment.size() != nodes.size() || plan.node_los.size() != nodes.size()) {
    throw std::invalid_argument("capacity: plan does not match the node set");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (!plan.node_los[k]) continue;
    const Point3& u = plan.uav_positions.at(static_cast<std::size_t>(plan.assignment[k]));
    sum += link_capacity(link, channel_gain(link, atm, distance(nodes.positions[k], u)));
  }
  return sum / static_cast<double>(nodes.size());
}

ClusterPlan cluster_by_capacity(const PlanContext& ctx, std::span<const Point3> uavs) {
  check_uavs(uavs);
  const std::vector<Point3>& nodes = ctx.nodes().positions;
  ClusterPlan plan;
  plan.uav_positions.assign(uavs.begin(), uavs.end());
  plan.assignment.assign(nodes.size(), 0);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    double best = 0.0;
    int pick = -1;
    for (std::size_t n = 0; n < uavs.size(); ++n) {
      if (!ctx.los(static_cast<int>(k), uavs[n])) continue;
      const double c = ctx.capacity(static_cast<int>(k), uavs[n]);
      if (c > best) {
        best = c;
        pick = static_cast<int>(n);
      }
    }
    if (pick < 0) {
      if (!plan.failed_node) plan.failed_node = static_cast<int>(k);
      pick = nearest_uav(nodes[k], uavs);
    }
    plan.assignment[k] = pick;
  }
  score(ctx, plan);
  plan.all_los = !plan.failed_node;
  return plan;
}

ClusterPlan geo_cluster_and_reposition(const PlanContext& ctx, std::span<const Point3> uavs, std::mt19937_64& rng,
                                       bool keep_regions) {
  ClusterPlan plan = cluster_by_capacity(ctx, uavs);
  plan.failed_node.reset();
  const std::vector<std::vector<int>> members = plan.clusters();
  for (std::size_t n = 0; n < members.size(); ++n) {
    if (members[n].empty()) {
      if (keep_regions) plan.feasible_regions.emplace_back(ctx.plane().nux, ctx.plane().nuy, true);
      continue;
    }
    BitMatrix region = ctx.acceptable_region(members[n]);
    const std::size_t cells = region.count();
    if (cells == 0) {
      if (!plan.failed_cluster) plan.failed_cluster = static_cast<int>(n);
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, cells - 1);
      std::size_t target = pick(rng);
      for (int r = 0; r < region.rows(); ++r) {
        for (int c = 0; c < region.cols(); ++c) {
          if (region.get(r, c) && target-- == 0) plan.uav_positions[n] = ctx.plane().point({r + 1, c + 1});
        }
      }
    }
    if (keep_regions) plan.feasible_regions.push_back(std::move(region));
  }
  score(ctx, plan);
  plan.all_los = !plan.failed_cluster &&
                 std::all_of(plan.node_los.begin(), plan.node_los.end(), [](bool b) { return b; });
  return plan;
}

ClusterPlan geo_kmeans_plan(const PlanContext& ctx, int n_uav, int n_restarts, std::uint64_t seed,
                            const KmeansOptions& options) {
  if (n_uav < 1) throw std::invalid_argument("geo k-means: need at least one UAV");
  if (n_restarts < 1) throw std::invalid_argument("geo k-means: need at least one restart");
  const UavPlane& plane = ctx.plane();
  const std::vector<Point3>& nodes = ctx.nodes().positions;

  std::vector<ClusterPlan> plans(static_cast<std::size_t>(n_restarts));
  parallel_for(plans.size(), ctx.threads(), [&](std::size_t r) {
    std::mt19937_64 rng = restart_rng(seed, static_cast<int>(r));
    std::uniform_int_distribution<int> di(1, plane.nux);
    std::uniform_int_distribution<int> dj(1, plane.nuy);
    std::vector<Point3> start(static_cast<std::size_t>(n_uav));
    for (Point3& p : start) {
      const int i = di(rng);
      p = plane.point({i, dj(rng)});
    }
    KmeansRun run = kmeans(nodes, std::move(start), options.max_iterations);

    ClusterPlan plan;
    plan.assignment = run.assignment;
    plan.centroids = run.centroids;
    plan.uav_positions.resize(run.centroids.size());
    const std::vector<std::vector<int>> members = plan.clusters();
    for (std::size_t n = 0; n < members.size(); ++n) {
      const Point3& c = run.centroids[n];
      BitMatrix region = ctx.acceptable_region(members[n]);
      if (std::optional<UavCell> cell = snap(region, plane, c.x, c.y)) {
        plan.uav_positions[n] = plane.point(*cell);
      } else {
        if (!plan.failed_cluster) plan.failed_cluster = static_cast<int>(n);
        plan.uav_positions[n] = plane.point(plane.nearest(c.x, c.y));
      }
      if (options.keep_regions) plan.feasible_regions.push_back(std::move(region));
    }
    score(ctx, plan);
    plan.all_los = !plan.failed_cluster &&
                   std::all_of(plan.node_los.begin(), plan.node_los.end(), [](bool b) { return b; });
    plans[r] = std::move(plan);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < plans.size(); ++r) {
    if (better(plans[r], plans[best])) best = r;
  }
  return std::move(plans[best]);
}

NetworkObjective::NetworkObjective(const PlanContext& ctx, std::uint64_t seed, double infeasible_penalty)
    : ctx_(&ctx), seed_(seed), penalty_(infeasible_penalty) {}

ClusterPlan NetworkObjective::plan(std::span<const UavCell> layout) const {
  std::uint64_t h = mix(0, seed_);
  for (const UavCell& c : layout) h = mix(mix(h, static_cast<std::uint64_t>(c.i)), static_cast<std::uint64_t>(c.j));
  std::mt19937_64 rng(h);
  const std::vector<Point3> uavs = ctx_->plane().points(layout);
  return geo_cluster_and_reposition(*ctx_, uavs, rng);
}

Evaluation NetworkObjective::evaluate(std::span<const UavCell> layout, ClusterPlan* plan_out) const {
  for (const UavCell& c : layout) {
    if (!ctx_->plane().contains(c)) return {};
  }
  ClusterPlan p = plan(layout);
  Layout repaired;
  repaired.reserve(p.uav_positions.size());
  for (const Point3& u : p.uav_positions) repaired.push_back(ctx_->plane().nearest(u.x, u.y));
  const double value = p.all_los ? p.avg_capacity : p.avg_capacity - penalty_;
  if (plan_out != nullptr) *plan_out = std::move(p);
  return {value, std::move(repaired)};
}

ObjectiveFn NetworkObjective::as_function() const {
  return [this](std::span<const UavCell> layout) { return (*this)(layout); };
}

}  // namespace losplan
