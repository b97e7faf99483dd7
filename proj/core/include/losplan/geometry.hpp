#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace losplan {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

double distance(const Point3& a, const Point3& b);
bool is_finite(const Point3& p);

/// Rotation about the z axis, cached as (cos, sin).
///
/// A frame with angle theta is the world frame rotated by theta about z;
/// `to_local` is R^-1 and `to_world` is R.
struct ZFrame {
  double c = 1.0;
  double s = 0.0;

  static ZFrame from_angle(double theta);

  double local_x(double x, double y) const { return c * x + s * y; }
  double local_y(double x, double y) const { return c * y - s * x; }
  Point3 to_local(const Point3& p) const { return {local_x(p.x, p.y), local_y(p.x, p.y), p.z}; }
  Point3 to_world(const Point3& p) const { return {c * p.x - s * p.y, s * p.x + c * p.y, p.z}; }
};

Point3 to_block_frame(const Point3& p, double theta);
Point3 from_block_frame(const Point3& p_local, double theta);

/// Applies R_z(theta_z) * R_y(theta_y) * R_x(theta_x) to p.
Point3 rotate_zyx(const Point3& p, double theta_z, double theta_y, double theta_x);

/// Which in-frame coordinate is constant on a face plane.
enum class FaceAxis { X, Y };

/// One vertical lateral face of a prism, expressed in its own z-rotated frame.
///
/// In the frame `ZFrame::from_angle(theta)` the face lies on the plane
/// `axis == plane`, spans the other horizontal coordinate over
/// (lateral_lo, lateral_hi) and z over (z_lo, z_hi). `outward` is +1 when the
/// outward normal points along +axis.
struct Face {
  double theta = 0.0;
  FaceAxis axis = FaceAxis::X;
  double plane = 0.0;
  double lateral_lo = 0.0;
  double lateral_hi = 0.0;
  double z_lo = 0.0;
  double z_hi = 0.0;
  double outward = 1.0;
};

/// Convex vertical prism obstacle.
///
/// `height` is the absolute roof elevation, not the extent above `base_z`.
/// Four-sided blocks use `half_x`/`half_y` (the cuboid of the 7-parameter block
/// model); any other side count is a regular polygon of `circumradius`.
struct PrismBlock {
  double center_x = 0.0;
  double center_y = 0.0;
  double base_z = 0.0;
  double height = 0.0;
  int side_count = 4;
  double theta = 0.0;
  double half_x = 0.0;
  double half_y = 0.0;
  double circumradius = 0.0;

  static PrismBlock cuboid(double cx, double cy, double base_z, double height, double size_x,
                           double size_y, double theta = 0.0);
  static PrismBlock polygon(double cx, double cy, double base_z, double height, int sides,
                            double circumradius, double theta = 0.0);

  bool is_cuboid() const { return side_count == 4 && circumradius == 0.0; }
  /// Radius of a circle about the center containing the whole footprint.
  double bounding_radius() const;

  /// Throws std::invalid_argument naming the violated invariant.
  void validate() const;

  friend bool operator==(const PrismBlock&, const PrismBlock&) = default;
};

/// Lateral faces, in counter-clockwise order. For cuboids the order is
/// x'=X1, y'=Y2, x'=X2, y'=Y1 (all in the block frame).
std::vector<Face> lateral_faces(const PrismBlock& block);

/// Footprint corners in world xy (z = height), counter-clockwise.
std::vector<Point3> footprint_vertices(const PrismBlock& block);

/// Recovers the two top corners of a face (world frame, z = z_hi).
std::pair<Point3, Point3> face_top_edge(const Face& face);

/// True when (x, y) lies strictly inside the block footprint.
bool footprint_contains(const PrismBlock& block, double x, double y);

/// True when p lies strictly inside the prism volume.
bool prism_contains(const PrismBlock& block, const Point3& p);

/// Target area S, ground grid, UAV candidate grid A, and obstacles.
///
/// Ground cell (i, j) with 1-based indices sits at (i*dx/Nx, j*dy/Ny); no
/// half-cell offset, so cell (Nx, Ny) lies on the far corner of S.
struct Scene {
  double dx = 0.0;
  double dy = 0.0;
  int nx = 0;
  int ny = 0;
  int nux = 0;
  int nuy = 0;
  double h_max = 0.0;
  /// Row-major nx*ny heights relative to cell (1,1); empty means flat ground.
  std::vector<double> ground_height;
  std::vector<PrismBlock> blocks;

  double cell_dx() const { return dx / nx; }
  double cell_dy() const { return dy / ny; }
  double uav_cell_dx() const { return dx / nux; }
  double uav_cell_dy() const { return dy / nuy; }

  double ground_at(int i, int j) const;
  /// Ground height of the cell nearest to (x, y), clamped into the grid.
  double ground_near(double x, double y) const;
  double min_ground() const;
  double max_ground() const;

  Point3 cell_point(int i, int j) const;
  Point3 uav_cell_point(int i, int j, double h_u) const;
  double diagonal() const;

  void validate() const;
};

}  // namespace losplan
