#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "losplan/bit_matrix.hpp"
#include "losplan/geometry.hpp"

namespace losplan {

/// LoS status of ground cells with respect to one or more aerial endpoints.
///
/// bits(i-1, j-1) is true when ground cell (i, j) is LoS. The NLoS grid is the
/// exact complement; a cell shadowed by several blocks is NLoS once.
struct CoverageGrid {
  BitMatrix bits;
  std::vector<Point3> sources;

  int rows() const { return bits.rows(); }
  int cols() const { return bits.cols(); }
  CoverageGrid nlos() const { return {bits.complement(), sources}; }
};

using LosVector = std::vector<bool>;

/// Endpoint-to-cell component differences over the whole ground grid in one
/// block frame: vx = x'_endpoint - x'_cell (row-major, nx*ny). Reciprocals of
/// zero components are stored as 0 with the matching `parallel_*` flag set.
struct SpatialVectorBatch {
  int rows = 0;
  int cols = 0;
  std::vector<double> vx, vy, vz;
  std::vector<double> inv_vx, inv_vy, inv_vz;
  std::vector<unsigned char> parallel_x, parallel_y, parallel_z;
};

SpatialVectorBatch spatial_vector_batch(const Scene& scene, const Point3& endpoint, double theta);

/// True when the open segment (a, b) passes through the interior of `block`:
/// it crosses a lateral face strictly inside its rectangle or crosses the roof
/// plane strictly inside the footprint. Grazing contact is LoS.
/// Throws std::invalid_argument when a == b.
bool segment_blocked(const Point3& a, const Point3& b, const PrismBlock& block);

/// Precomputed occlusion engine for one scene; immutable and thread-safe.
class LosEngine {
 public:
  explicit LosEngine(Scene scene);
  ~LosEngine();
  LosEngine(LosEngine&&) noexcept;
  LosEngine& operator=(LosEngine&&) noexcept;
  LosEngine(const LosEngine&) = delete;
  LosEngine& operator=(const LosEngine&) = delete;

  const Scene& scene() const { return scene_; }

  /// True when any block occludes segment (a, b).
  bool blocked(const Point3& a, const Point3& b) const;

  /// Batched ground-grid visibility for one UAV.
  CoverageGrid coverage(const Point3& uav) const;
  /// Reference path: per-cell scalar segment tests.
  CoverageGrid coverage_scalar(const Point3& uav) const;

  LosVector los_vector(std::span<const Point3> points, const Point3& uav) const;

  /// Visibility of every UAV-plane cell (Nux x Nuy at altitude h_u) from one point.
  BitMatrix plane_visibility(const Point3& point, double h_u) const;
  BitMatrix acceptable_region(std::span<const Point3> cluster, double h_u) const;

  /// Ground cells strictly inside some block footprint.
  BitMatrix footprint_mask() const;

  /// Per-block precomputed frames and bounds (opaque).
  struct Prepared;

 private:
  Scene scene_;
  std::vector<Prepared> prepared_;

  bool blocked_by(const Prepared& block, const Point3& a, const Point3& b) const;
  void check_uav(const Point3& uav) const;
};

CoverageGrid coverage_matrix(const Scene& scene, const Point3& uav);
LosVector los_vector(std::span<const Point3> points, const Point3& uav, const Scene& scene);
BitMatrix acceptable_region(std::span<const Point3> cluster_points, const Scene& scene, double h_u);

/// Elementwise OR. Throws std::invalid_argument on an empty list or mismatched shapes.
CoverageGrid union_coverage(std::span<const CoverageGrid> grids);

/// 100 * LoS cells / (Nx * Ny).
double coverage_percent(const CoverageGrid& grid);
/// Same statistic with the cells of `excluded` removed from both counts.
double coverage_percent(const CoverageGrid& grid, const BitMatrix& excluded);

}  // namespace losplan
