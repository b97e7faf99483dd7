#include "losplan/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace losplan {

double distance(const Point3& a, const Point3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

bool is_finite(const Point3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

ZFrame ZFrame::from_angle(double theta) {
  if (theta == 0.0) return {1.0, 0.0};
  return {std::cos(theta), std::sin(theta)};
}

Point3 to_block_frame(const Point3& p, double theta) { return ZFrame::from_angle(theta).to_local(p); }

Point3 from_block_frame(const Point3& p_local, double theta) {
  return ZFrame::from_angle(theta).to_world(p_local);
}

Point3 rotate_zyx(const Point3& p, double theta_z, double theta_y, double theta_x) {
  const double cx = std::cos(theta_x), sx = std::sin(theta_x);
  const double cy = std::cos(theta_y), sy = std::sin(theta_y);
  const double cz = std::cos(theta_z), sz = std::sin(theta_z);
  // x rotation first, then y, then z: R_z * R_y * R_x * p.
  const Point3 a{p.x, cx * p.y - sx * p.z, sx * p.y + cx * p.z};
  const Point3 b{cy * a.x + sy * a.z, a.y, -sy * a.x + cy * a.z};
  return {cz * b.x - sz * b.y, sz * b.x + cz * b.y, b.z};
}

PrismBlock PrismBlock::cuboid(double cx, double cy, double base_z, double height, double size_x,
                              double size_y, double theta) {
  PrismBlock b;
  b.center_x = cx;
  b.center_y = cy;
  b.base_z = base_z;
  b.height = height;
  b.side_count = 4;
  b.theta = theta;
  b.half_x = size_x / 2.0;
  b.half_y = size_y / 2.0;
  return b;
}

PrismBlock PrismBlock::polygon(double cx, double cy, double base_z, double height, int sides,
                               double circumradius, double theta) {
  PrismBlock b;
  b.center_x = cx;
  b.center_y = cy;
  b.base_z = base_z;
  b.height = height;
  b.side_count = sides;
  b.theta = theta;
  b.circumradius = circumradius;
  return b;
}

double PrismBlock::bounding_radius() const {
  return is_cuboid() ? std::hypot(half_x, half_y) : circumradius;
}

void PrismBlock::validate() const {
  const auto fail = [](const std::string& what) { throw std::invalid_argument("block: " + what); };
  for (double v : {center_x, center_y, base_z, height, theta, half_x, half_y, circumradius}) {
    if (!std::isfinite(v)) fail("non-finite parameter");
  }
  if (!(height > base_z)) fail("roof height must be strictly above base_z");
  if (side_count < 3) fail("side_count must be at least 3");
  if (is_cuboid()) {
    if (!(half_x > 0.0) || !(half_y > 0.0)) fail("cuboid side lengths must be positive");
  } else if (!(circumradius > 0.0)) {
    fail("polygon circumradius must be positive");
  }
}

std::vector<Face> lateral_faces(const PrismBlock& block) {
  std::vector<Face> faces;
  faces.reserve(static_cast<std::size_t>(block.side_count));
  if (block.is_cuboid()) {
    const ZFrame frame = ZFrame::from_angle(block.theta);
    const double cx = frame.local_x(block.center_x, block.center_y);
    const double cy = frame.local_y(block.center_x, block.center_y);
    const double x1 = cx - block.half_x, x2 = cx + block.half_x;
    const double y1 = cy - block.half_y, y2 = cy + block.half_y;
    const auto face = [&](FaceAxis axis, double plane, double lo, double hi, double outward) {
      return Face{block.theta, axis, plane, lo, hi, block.base_z, block.height, outward};
    };
    faces.push_back(face(FaceAxis::X, x1, y1, y2, -1.0));
    faces.push_back(face(FaceAxis::Y, y2, x1, x2, +1.0));
    faces.push_back(face(FaceAxis::X, x2, y1, y2, +1.0));
    faces.push_back(face(FaceAxis::Y, y1, x1, x2, -1.0));
    return faces;
  }
  const int n = block.side_count;
  const double half_angle = std::numbers::pi / n;
  const double apothem = block.circumradius * std::cos(half_angle);
  const double half_side = block.circumradius * std::sin(half_angle);
  for (int k = 0; k < n; ++k) {
    const double normal_angle = block.theta + (2 * k + 1) * half_angle;
    const ZFrame frame = ZFrame::from_angle(normal_angle);
    const double cx = frame.local_x(block.center_x, block.center_y);
    const double cy = frame.local_y(block.center_x, block.center_y);
    faces.push_back(Face{normal_angle, FaceAxis::X, cx + apothem, cy - half_side, cy + half_side,
                         block.base_z, block.height, +1.0});
  }
  return faces;
}

std::vector<Point3> footprint_vertices(const PrismBlock& block) {
  std::vector<Point3> out;
  if (block.is_cuboid()) {
    const ZFrame frame = ZFrame::from_angle(block.theta);
    const double cx = frame.local_x(block.center_x, block.center_y);
    const double cy = frame.local_y(block.center_x, block.center_y);
    const double xs[] = {-1, 1, 1, -1};
    const double ys[] = {-1, -1, 1, 1};
    for (int k = 0; k < 4; ++k) {
      out.push_back(frame.to_world({cx + xs[k] * block.half_x, cy + ys[k] * block.half_y, block.height}));
    }
    return out;
  }
  for (int k = 0; k < block.side_count; ++k) {
    const double a = block.theta + 2.0 * std::numbers::pi * k / block.side_count;
    out.push_back({block.center_x + block.circumradius * std::cos(a),
                   block.center_y + block.circumradius * std::sin(a), block.height});
  }
  return out;
}

std::pair<Point3, Point3> face_top_edge(const Face& face) {
  const ZFrame frame = ZFrame::from_angle(face.theta);
  if (face.axis == FaceAxis::X) {
    return {frame.to_world({face.plane, face.lateral_lo, face.z_hi}),
            frame.to_world({face.plane, face.lateral_hi, face.z_hi})};
  }
  return {frame.to_world({face.lateral_lo, face.plane, face.z_hi}),
          frame.to_world({face.lateral_hi, face.plane, face.z_hi})};
}

bool footprint_contains(const PrismBlock& block, double x, double y) {
  for (const Face& f : lateral_faces(block)) {
    const ZFrame frame = ZFrame::from_angle(f.theta);
    const double coord = f.axis == FaceAxis::X ? frame.local_x(x, y) : frame.local_y(x, y);
    if (!(f.outward * (coord - f.plane) < 0.0)) return false;
  }
  return true;
}

bool prism_contains(const PrismBlock& block, const Point3& p) {
  return p.z > block.base_z && p.z < block.height && footprint_contains(block, p.x, p.y);
}

double Scene::ground_at(int i, int j) const {
  if (ground_height.empty()) return 0.0;
  return ground_height[static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(ny) +
                       static_cast<std::size_t>(j - 1)];
}

double Scene::ground_near(double x, double y) const {
  if (ground_height.empty()) return 0.0;
  const int i = std::clamp(static_cast<int>(std::lround(x / cell_dx())), 1, nx);
  const int j = std::clamp(static_cast<int>(std::lround(y / cell_dy())), 1, ny);
  return ground_at(i, j);
}

double Scene::min_ground() const {
  if (ground_height.empty()) return 0.0;
  return *std::min_element(ground_height.begin(), ground_height.end());
}

double Scene::max_ground() const {
  if (ground_height.empty()) return 0.0;
  return *std::max_element(ground_height.begin(), ground_height.end());
}

Point3 Scene::cell_point(int i, int j) const { return {i * cell_dx(), j * cell_dy(), ground_at(i, j)}; }

Point3 Scene::uav_cell_point(int i, int j, double h_u) const {
  return {i * uav_cell_dx(), j * uav_cell_dy(), h_u};
}

double Scene::diagonal() const { return std::hypot(dx, dy); }

void Scene::validate() const {
  const auto fail = [](const std::string& what) { throw std::invalid_argument("scene: " + what); };
  if (!(dx > 0.0) || !(dy > 0.0) || !std::isfinite(dx) || !std::isfinite(dy)) fail("area sides must be positive");
  if (nx < 1 || ny < 1) fail("ground grid must have at least one cell per axis");
  if (nux < 1 || nuy < 1) fail("UAV grid must have at least one cell per axis");
  if (!(h_max > 0.0)) fail("h_max must be positive");
  if (!ground_height.empty()) {
    if (ground_height.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny)) {
      fail("ground_height must hold nx*ny values");
    }
    if (ground_height.front() != 0.0) fail("ground_height at reference cell (1,1) must be 0");
    for (double h : ground_height) {
      if (!std::isfinite(h)) fail("ground_height must be finite");
    }
  }
  for (std::size_t m = 0; m < blocks.size(); ++m) {
    try {
      blocks[m].validate();
    } catch (const std::invalid_argument& e) {
      fail("block " + std::to_string(m) + ": " + e.what());
    }
  }
}

}  // namespace losplan
