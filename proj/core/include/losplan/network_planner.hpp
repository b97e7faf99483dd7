#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "losplan/bit_matrix.hpp"
#include "losplan/geometry.hpp"
#include "losplan/los_engine.hpp"
#include "losplan/placement.hpp"
#include "losplan/thz_channel.hpp"

namespace losplan {

struct GroundNodeSet {
  std::vector<Point3> positions;

  std::size_t size() const { return positions.size(); }
  /// Throws unless nonempty and every node lies inside the scene footprint.
  void validate(const Scene& scene) const;
};

/// Node-to-UAV clustering with UAV positions and the resulting capacity.
struct ClusterPlan {
  std::vector<int> assignment;  // node k -> UAV index
  std::vector<Point3> uav_positions;
  std::vector<double> node_capacity;  // bits/s/Hz, 0 for NLoS links
  std::vector<bool> node_los;         // LoS to the assigned UAV
  double avg_capacity = 0.0;
  bool all_los = false;
  /// Acceptable region per cluster (empty unless computed).
  std::vector<BitMatrix> feasible_regions;
  /// k-means centroids before snapping (geo k-means only).
  std::vector<Point3> centroids;
  /// First node in NLoS of every UAV (capacity clustering failure).
  std::optional<int> failed_node;
  /// First cluster whose acceptable region is empty.
  std::optional<int> failed_cluster;

  std::vector<std::vector<int>> clusters() const;
};

/// Shared state for planning one node set at one altitude: the LoS engine,
/// channel, and a per-node visibility map over the UAV plane A.
class PlanContext {
 public:
  PlanContext(const LosEngine& engine, GroundNodeSet nodes, LinkParams link, Atmosphere atm, double h_u,
              int threads = 1);

  const LosEngine& engine() const { return *engine_; }
  const GroundNodeSet& nodes() const { return nodes_; }
  const LinkParams& link() const { return link_; }
  const Atmosphere& atmosphere() const { return atm_; }
  const UavPlane& plane() const { return plane_; }
  int threads() const { return threads_; }

  bool los(int node, const Point3& uav) const;
  /// Visibility of plane A from node k (same bits as los() on grid points).
  const BitMatrix& node_visibility(int node) const { return visibility_[static_cast<std::size_t>(node)]; }
  /// AND of node_visibility over the members; all-true for an empty cluster.
  BitMatrix acceptable_region(std::span<const int> members) const;
  double capacity(int node, const Point3& uav) const;

 private:
  const LosEngine* engine_;
  GroundNodeSet nodes_;
  LinkParams link_;
  Atmosphere atm_;
  UavPlane plane_;
  int threads_;
  double mu_;
  std::vector<BitMatrix> visibility_;
};

/// (1/N_g) * sum of log2(1 + P h^2 / N0) over LoS node links of the plan.
double avg_network_capacity(const ClusterPlan& plan, const GroundNodeSet& nodes, const LinkParams& link,
                            const Atmosphere& atm);

/// Assign each node to the LoS UAV of highest capacity (ties to the lowest
/// index). If a node sees no UAV, failed_node names the first such node; it is
/// still assigned to its nearest UAV with zero capacity and all_los is false.
ClusterPlan cluster_by_capacity(const PlanContext& ctx, std::span<const Point3> uavs);

/// Capacity clustering with NLoS nodes joining the nearest UAV, then each UAV
/// moves to a uniformly random cell of its cluster's acceptable region.
/// A cluster with an empty region leaves its UAV in place and sets
/// failed_cluster; UAVs without nodes stay where they are.
ClusterPlan geo_cluster_and_reposition(const PlanContext& ctx, std::span<const Point3> uavs, std::mt19937_64& rng,
                                       bool keep_regions = false);

struct KmeansOptions {
  int max_iterations = 1000;
  bool keep_regions = true;
};

/// Best of n_restarts k-means runs with UAVs snapped to the closest cell of
/// each cluster's acceptable region. Restarts compare on (all_los, capacity),
/// ties to the lowest restart index. Restart r depends only on (seed, r).
ClusterPlan geo_kmeans_plan(const PlanContext& ctx, int n_uav, int n_restarts, std::uint64_t seed,
                            const KmeansOptions& options = {});

/// Objective for the placement drivers: runs geo_cluster_and_reposition on
/// the layout and reports the repositioned layout as the repair. Value is the
/// average capacity when every cluster is feasible, otherwise the LoS-only
/// capacity minus infeasible_penalty. Randomness is derived from the layout
/// and seed, so equal layouts always score equally.
class NetworkObjective {
 public:
  NetworkObjective(const PlanContext& ctx, std::uint64_t seed, double infeasible_penalty = 100.0);

  Evaluation operator()(std::span<const UavCell> layout) const { return evaluate(layout, nullptr); }
  /// Also hands back the plan the value belongs to when plan_out is set.
  Evaluation evaluate(std::span<const UavCell> layout, ClusterPlan* plan_out) const;
  ClusterPlan plan(std::span<const UavCell> layout) const;
  ObjectiveFn as_function() const;

 private:
  const PlanContext* ctx_;
  std::uint64_t seed_;
  double penalty_;
};

}  // namespace losplan
