#include "losplan/los_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace losplan {

namespace {

struct PreparedFace {
  FaceAxis axis = FaceAxis::X;
  double plane = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double outward = 1.0;
};

struct PreparedFrame {
  ZFrame frame;
  std::vector<PreparedFace> faces;
};

}  // namespace

struct LosEngine::Prepared {
  double z_lo = 0.0;
  double z_hi = 0.0;
  bool cuboid = true;
  std::vector<PreparedFrame> frames;
  ZFrame roof_frame;
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.0;
  std::vector<Point3> vertices;
};

namespace {

using Prepared = LosEngine::Prepared;

Prepared prepare(const PrismBlock& block) {
  block.validate();
  Prepared p;
  p.z_lo = block.base_z;
  p.z_hi = block.height;
  p.cuboid = block.is_cuboid();
  p.cx = block.center_x;
  p.cy = block.center_y;
  p.radius = block.bounding_radius();
  p.vertices = footprint_vertices(block);
  const std::vector<Face> faces = lateral_faces(block);
  if (p.cuboid) {
    PreparedFrame frame{ZFrame::from_angle(block.theta), {}};
    for (const Face& f : faces) frame.faces.push_back({f.axis, f.plane, f.lateral_lo, f.lateral_hi, f.outward});
    p.roof_frame = frame.frame;
    p.frames.push_back(std::move(frame));
  } else {
    for (const Face& f : faces) {
      p.frames.push_back({ZFrame::from_angle(f.theta), {{f.axis, f.plane, f.lateral_lo, f.lateral_hi, f.outward}}});
    }
    p.roof_frame = ZFrame{};
  }
  return p;
}

// Face-plane crossing in the Hadamard form: the hit point is the segment
// midpoint plus the direction scaled by (plane - mid_normal) / v_normal.
// Anchoring at the midpoint makes the result exactly symmetric in (a, b).
inline bool face_hit(const PreparedFace& f, double z_lo, double z_hi, double a_normal, double b_normal,
                     double v_normal, double inv_v_normal, double v_lateral, double v_z, double m_normal,
                     double m_lateral, double m_z) {
  if (v_normal == 0.0) return false;
  if (!((f.plane - a_normal) * (f.plane - b_normal) < 0.0)) return false;
  const double d = f.plane - m_normal;
  const double hit_lateral = v_lateral * inv_v_normal * d + m_lateral;
  const double hit_z = v_z * inv_v_normal * d + m_z;
  return f.lo < hit_lateral && hit_lateral < f.hi && z_lo < hit_z && hit_z < z_hi;
}

inline bool roof_inside(const Prepared& p, double rx, double ry) {
  if (p.cuboid) {
    for (const PreparedFace& f : p.frames.front().faces) {
      const double coord = f.axis == FaceAxis::X ? rx : ry;
      if (!(f.outward * (coord - f.plane) < 0.0)) return false;
    }
    return true;
  }
  for (const PreparedFrame& fr : p.frames) {
    const PreparedFace& f = fr.faces.front();
    if (!(f.outward * (fr.frame.local_x(rx, ry) - f.plane) < 0.0)) return false;
  }
  return true;
}

inline bool roof_hit(const Prepared& p, double a_z, double b_z, double v_x, double v_y, double v_z,
                     double inv_v_z, double m_x, double m_y, double m_z) {
  if (v_z == 0.0) return false;
  if (!((p.z_hi - a_z) * (p.z_hi - b_z) < 0.0)) return false;
  const double d = p.z_hi - m_z;
  const double rx = v_x * inv_v_z * d + m_x;
  const double ry = v_y * inv_v_z * d + m_y;
  return roof_inside(p, rx, ry);
}

inline double safe_inverse(double v) { return v != 0.0 ? 1.0 / v : 0.0; }

bool scalar_blocked(const Prepared& p, const Point3& a, const Point3& b) {
  const double v_z = a.z - b.z;
  const double m_z = (a.z + b.z) * 0.5;
  for (const PreparedFrame& fr : p.frames) {
    const Point3 la = fr.frame.to_local(a);
    const Point3 lb = fr.frame.to_local(b);
    const double v_x = la.x - lb.x, v_y = la.y - lb.y;
    const double m_x = (la.x + lb.x) * 0.5, m_y = (la.y + lb.y) * 0.5;
    const double inv_x = safe_inverse(v_x), inv_y = safe_inverse(v_y);
    for (const PreparedFace& f : fr.faces) {
      const bool hit = f.axis == FaceAxis::X
                           ? face_hit(f, p.z_lo, p.z_hi, la.x, lb.x, v_x, inv_x, v_y, v_z, m_x, m_y, m_z)
                           : face_hit(f, p.z_lo, p.z_hi, la.y, lb.y, v_y, inv_y, v_x, v_z, m_y, m_x, m_z);
      if (hit) return true;
    }
  }
  const Point3 ra = p.roof_frame.to_local(a);
  const Point3 rb = p.roof_frame.to_local(b);
  return roof_hit(p, a.z, b.z, ra.x - rb.x, ra.y - rb.y, v_z, safe_inverse(v_z), (ra.x + rb.x) * 0.5,
                  (ra.y + rb.y) * 0.5, m_z);
}

// Grid of query cells: cell (r, c), 0-based, sits at ((r+1)*step_x, (c+1)*step_y, z(r, c)).
struct CellGrid {
  int rows = 0;
  int cols = 0;
  double step_x = 0.0;
  double step_y = 0.0;
  const std::vector<double>* heights = nullptr;  // row-major, null means constant
  double constant_z = 0.0;
  double min_z = 0.0;
  double max_z = 0.0;

  double z(int r, int c) const {
    return heights ? (*heights)[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                                static_cast<std::size_t>(c)]
                   : constant_z;
  }
};

struct Region {
  int r0 = 0, r1 = -1, c0 = 0, c1 = -1;
  bool circle_test = true;
};

// Conservative set of cells whose segment to the endpoint can touch the block.
// When the endpoint is above both the roof and every cell, the shadow on
// z >= min_z lies in the hull of the footprint and its projection scaled
// by (e.z - min_z) / (e.z - roof) about the endpoint.
Region shadow_region(const Prepared& p, const Point3& e, const CellGrid& g) {
  Region reg{0, g.rows - 1, 0, g.cols - 1, true};
  if (!(e.z > p.z_hi && e.z > g.max_z)) return reg;
  const double k = (e.z - g.min_z) / (e.z - p.z_hi);
  if (!std::isfinite(k)) return reg;
  double xmin = e.x, xmax = e.x, ymin = e.y, ymax = e.y;
  bool first = true;
  for (const Point3& v : p.vertices) {
    const double px = e.x + (v.x - e.x) * k, py = e.y + (v.y - e.y) * k;
    for (auto [x, y] : {std::pair{v.x, v.y}, std::pair{px, py}}) {
      if (first) {
        xmin = xmax = x;
        ymin = ymax = y;
        first = false;
      }
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  const double margin_x = g.step_x + 1e-6 * (std::abs(xmin) + std::abs(xmax) + 1.0);
  const double margin_y = g.step_y + 1e-6 * (std::abs(ymin) + std::abs(ymax) + 1.0);
  const auto lo_index = [](double v, double step) { return static_cast<int>(std::floor(v / step)) - 2; };
  const auto hi_index = [](double v, double step) { return static_cast<int>(std::ceil(v / step)); };
  const double big = 1e9;
  reg.r0 = std::max(0, lo_index(std::max(-big, xmin - margin_x), g.step_x));
  reg.r1 = std::min(g.rows - 1, hi_index(std::min(big, xmax + margin_x), g.step_x));
  reg.c0 = std::max(0, lo_index(std::max(-big, ymin - margin_y), g.step_y));
  reg.c1 = std::min(g.cols - 1, hi_index(std::min(big, ymax + margin_y), g.step_y));
  reg.circle_test = false;
  return reg;
}

bool near_footprint(const Prepared& p, const Point3& e, double x, double y, double z) {
  if (!(std::min(e.z, z) < p.z_hi && std::max(e.z, z) > p.z_lo)) return false;
  const double dx = x - e.x, dy = y - e.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.cx - e.x) * dx + (p.cy - e.y) * dy) / len2, 0.0, 1.0);
  const double qx = e.x + t * dx - p.cx, qy = e.y + t * dy - p.cy;
  const double r = p.radius * (1.0 + 1e-9) + 1e-6;
  return qx * qx + qy * qy <= r * r;
}

// Batched occlusion: marks in `nlos` every cell whose segment to `e` is blocked.
// Per frame the component differences (V), their reciprocals and the segment
// midpoints are built for a whole row, then each face is tested elementwise.
void occlusion_batch(const std::vector<Prepared>& blocks, const Point3& e, const CellGrid& g, BitMatrix& nlos) {
  const int width = g.cols;
  std::vector<double> wx(width), wy(width), wz(width);
  std::vector<double> vx(width), vy(width), vz(width), ivx(width), ivy(width), ivz(width);
  std::vector<double> mx(width), my(width), mz(width), lx(width), ly(width);
  std::vector<unsigned char> active(width), hit(width);

  for (const Prepared& p : blocks) {
    const Region reg = shadow_region(p, e, g);
    if (reg.r0 > reg.r1 || reg.c0 > reg.c1) continue;
    for (int r = reg.r0; r <= reg.r1; ++r) {
      const int n = reg.c1 - reg.c0 + 1;
      bool any_active = false;
      for (int k = 0; k < n; ++k) {
        const int c = reg.c0 + k;
        wx[k] = (r + 1) * g.step_x;
        wy[k] = (c + 1) * g.step_y;
        wz[k] = g.z(r, c);
        active[k] = !nlos.get(r, c) && (!reg.circle_test || near_footprint(p, e, wx[k], wy[k], wz[k]));
        hit[k] = 0;
        any_active |= active[k] != 0;
      }
      if (!any_active) continue;
      for (int k = 0; k < n; ++k) {
        vz[k] = e.z - wz[k];
        mz[k] = (e.z + wz[k]) * 0.5;
        ivz[k] = safe_inverse(vz[k]);
      }
      for (const PreparedFrame& fr : p.frames) {
        const Point3 le = fr.frame.to_local(e);
        for (int k = 0; k < n; ++k) {
          lx[k] = fr.frame.local_x(wx[k], wy[k]);
          ly[k] = fr.frame.local_y(wx[k], wy[k]);
          vx[k] = le.x - lx[k];
          vy[k] = le.y - ly[k];
          ivx[k] = safe_inverse(vx[k]);
          ivy[k] = safe_inverse(vy[k]);
          mx[k] = (le.x + lx[k]) * 0.5;
          my[k] = (le.y + ly[k]) * 0.5;
        }
        for (const PreparedFace& f : fr.faces) {
          if (f.axis == FaceAxis::X) {
            for (int k = 0; k < n; ++k) {
              if (active[k] && !hit[k]) {
                hit[k] = face_hit(f, p.z_lo, p.z_hi, le.x, lx[k], vx[k], ivx[k], vy[k], vz[k], mx[k], my[k], mz[k]);
              }
            }
          } else {
            for (int k = 0; k < n; ++k) {
              if (active[k] && !hit[k]) {
                hit[k] = face_hit(f, p.z_lo, p.z_hi, le.y, ly[k], vy[k], ivy[k], vx[k], vz[k], my[k], mx[k], mz[k]);
              }
            }
          }
        }
      }
      // Roof plane, evaluated in the roof frame.
      const Point3 re = p.roof_frame.to_local(e);
      for (int k = 0; k < n; ++k) {
        if (!active[k] || hit[k]) continue;
        const double rx = p.roof_frame.local_x(wx[k], wy[k]);
        const double ry = p.roof_frame.local_y(wx[k], wy[k]);
        hit[k] = roof_hit(p, e.z, wz[k], re.x - rx, re.y - ry, vz[k], ivz[k], (re.x + rx) * 0.5,
                          (re.y + ry) * 0.5, mz[k]);
      }
      for (int k = 0; k < n; ++k) {
        if (hit[k]) nlos.set(r, reg.c0 + k, true);
      }
    }
  }
}

}  // namespace

SpatialVectorBatch spatial_vector_batch(const Scene& scene, const Point3& endpoint, double theta) {
  const ZFrame frame = ZFrame::from_angle(theta);
  const Point3 le = frame.to_local(endpoint);
  SpatialVectorBatch b;
  b.rows = scene.nx;
  b.cols = scene.ny;
  const std::size_t n = static_cast<std::size_t>(scene.nx) * static_cast<std::size_t>(scene.ny);
  for (auto* v : {&b.vx, &b.vy, &b.vz, &b.inv_vx, &b.inv_vy, &b.inv_vz}) v->resize(n);
  for (auto* v : {&b.parallel_x, &b.parallel_y, &b.parallel_z}) v->resize(n);
  for (int i = 1; i <= scene.nx; ++i) {
    for (int j = 1; j <= scene.ny; ++j) {
      const std::size_t k = static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(scene.ny) +
                            static_cast<std::size_t>(j - 1);
      const Point3 lc = frame.to_local(scene.cell_point(i, j));
      b.vx[k] = le.x - lc.x;
      b.vy[k] = le.y - lc.y;
      b.vz[k] = le.z - lc.z;
      b.parallel_x[k] = b.vx[k] == 0.0;
      b.parallel_y[k] = b.vy[k] == 0.0;
      b.parallel_z[k] = b.vz[k] == 0.0;
      b.inv_vx[k] = safe_inverse(b.vx[k]);
      b.inv_vy[k] = safe_inverse(b.vy[k]);
      b.inv_vz[k] = safe_inverse(b.vz[k]);
    }
  }
  return b;
}

bool segment_blocked(const Point3& a, const Point3& b, const PrismBlock& block) {
  if (a == b) throw std::invalid_argument("segment_blocked: degenerate segment (a == b)");
  return scalar_blocked(prepare(block), a, b);
}

LosEngine::LosEngine(Scene scene) : scene_(std::move(scene)) {
  scene_.validate();
  prepared_.reserve(scene_.blocks.size());
  for (const PrismBlock& b : scene_.blocks) prepared_.push_back(prepare(b));
}

LosEngine::~LosEngine() = default;
LosEngine::LosEngine(LosEngine&&) noexcept = default;
LosEngine& LosEngine::operator=(LosEngine&&) noexcept = default;

bool LosEngine::blocked_by(const Prepared& block, const Point3& a, const Point3& b) const {
  return scalar_blocked(block, a, b);
}

bool LosEngine::blocked(const Point3& a, const Point3& b) const {
  if (a == b) throw std::invalid_argument("segment_blocked: degenerate segment (a == b)");
  for (const Prepared& p : prepared_) {
    if (blocked_by(p, a, b)) return true;
  }
  return false;
}

void LosEngine::check_uav(const Point3& uav) const {
  if (!is_finite(uav)) throw std::invalid_argument("coverage: UAV position must be finite");
  if (uav.z > scene_.h_max) throw std::invalid_argument("coverage: UAV altitude exceeds h_max");
  if (!(uav.z > scene_.ground_near(uav.x, uav.y))) {
    throw std::invalid_argument("coverage: UAV must be above the ground at its position");
  }
  for (const PrismBlock& b : scene_.blocks) {
    if (prism_contains(b, uav)) throw std::invalid_argument("coverage: endpoint occluded at source");
  }
}

CoverageGrid LosEngine::coverage(const Point3& uav) const {
  check_uav(uav);
  CellGrid g{scene_.nx, scene_.ny, scene_.cell_dx(), scene_.cell_dy(),
             scene_.ground_height.empty() ? nullptr : &scene_.ground_height, 0.0,
             scene_.min_ground(), scene_.max_ground()};
  BitMatrix nlos(scene_.nx, scene_.ny, false);
  occlusion_batch(prepared_, uav, g, nlos);
  return {nlos.complement(), {uav}};
}

CoverageGrid LosEngine::coverage_scalar(const Point3& uav) const {
  check_uav(uav);
  BitMatrix los(scene_.nx, scene_.ny, true);
  for (int i = 1; i <= scene_.nx; ++i) {
    for (int j = 1; j <= scene_.ny; ++j) {
      const Point3 cell = scene_.cell_point(i, j);
      for (const Prepared& p : prepared_) {
        if (scalar_blocked(p, uav, cell)) {
          los.set(i - 1, j - 1, false);
          break;
        }
      }
    }
  }
  return {std::move(los), {uav}};
}

LosVector LosEngine::los_vector(std::span<const Point3> points, const Point3& uav) const {
  if (points.empty()) throw std::invalid_argument("los_vector: empty point list");
  LosVector out(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) out[k] = !blocked(uav, points[k]);
  return out;
}

BitMatrix LosEngine::plane_visibility(const Point3& point, double h_u) const {
  CellGrid g{scene_.nux, scene_.nuy, scene_.uav_cell_dx(), scene_.uav_cell_dy(), nullptr, h_u, h_u, h_u};
  BitMatrix nlos(scene_.nux, scene_.nuy, false);
  occlusion_batch(prepared_, point, g, nlos);
  return nlos.complement();
}

BitMatrix LosEngine::acceptable_region(std::span<const Point3> cluster, double h_u) const {
  if (cluster.empty()) throw std::invalid_argument("acceptable_region: empty cluster");
  if (h_u > scene_.h_max) throw std::invalid_argument("acceptable_region: h_u exceeds h_max");
  BitMatrix region(scene_.nux, scene_.nuy, true);
  for (const Point3& p : cluster) {
    region &= plane_visibility(p, h_u);
    if (!region.any()) break;
  }
  return region;
}

BitMatrix LosEngine::footprint_mask() const {
  BitMatrix mask(scene_.nx, scene_.ny, false);
  for (const PrismBlock& b : scene_.blocks) {
    const double r = b.bounding_radius();
    const int i0 = std::max(1, static_cast<int>(std::floor((b.center_x - r) / scene_.cell_dx())));
    const int i1 = std::min(scene_.nx, static_cast<int>(std::ceil((b.center_x + r) / scene_.cell_dx())));
    const int j0 = std::max(1, static_cast<int>(std::floor((b.center_y - r) / scene_.cell_dy())));
    const int j1 = std::min(scene_.ny, static_cast<int>(std::ceil((b.center_y + r) / scene_.cell_dy())));
    for (int i = i0; i <= i1; ++i) {
      for (int j = j0; j <= j1; ++j) {
        const Point3 c = scene_.cell_point(i, j);
        if (footprint_contains(b, c.x, c.y)) mask.set(i - 1, j - 1, true);
      }
    }
  }
  return mask;
}

CoverageGrid coverage_matrix(const Scene& scene, const Point3& uav) { return LosEngine(scene).coverage(uav); }

LosVector los_vector(std::span<const Point3> points, const Point3& uav, const Scene& scene) {
  return LosEngine(scene).los_vector(points, uav);
}

BitMatrix acceptable_region(std::span<const Point3> cluster_points, const Scene& scene, double h_u) {
  return LosEngine(scene).acceptable_region(cluster_points, h_u);
}

CoverageGrid union_coverage(std::span<const CoverageGrid> grids) {
  if (grids.empty()) throw std::invalid_argument("union_coverage: no grids");
  CoverageGrid out = grids.front();
  for (std::size_t k = 1; k < grids.size(); ++k) {
    if (!out.bits.same_shape(grids[k].bits)) throw std::invalid_argument("union_coverage: dimension mismatch");
    out.bits |= grids[k].bits;
    out.sources.insert(out.sources.end(), grids[k].sources.begin(), grids[k].sources.end());
  }
  return out;
}

double coverage_percent(const CoverageGrid& grid) {
  if (grid.bits.size() == 0) return 0.0;
  return 100.0 * static_cast<double>(grid.bits.count()) / static_cast<double>(grid.bits.size());
}

double coverage_percent(const CoverageGrid& grid, const BitMatrix& excluded) {
  const std::size_t denom = grid.bits.size() - excluded.count();
  if (denom == 0) return 0.0;
  return 100.0 * static_cast<double>(grid.bits.count_excluding(excluded)) / static_cast<double>(denom);
}

}  // namespace losplan
