#include "medial/geom/poisson_disk.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

namespace medial {

namespace {

class SpacingGrid {
 public:
  explicit SpacingGrid(double radius) : radius_(radius), inv_cell_(1.0 / radius) {}

  bool accepts(const Vec3& p) const {
    const auto c = cell(p);
    const double r2 = radius_ * radius_;
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find(key(c[0] + dx, c[1] + dy, c[2] + dz));
          if (it == cells_.end()) continue;
          for (const Vec3& q : it->second)
            if ((q - p).squaredNorm() < r2) return false;
        }
    return true;
  }

  void insert(const Vec3& p) {
    const auto c = cell(p);
    cells_[key(c[0], c[1], c[2])].push_back(p);
  }

 private:
  std::array<std::int64_t, 3> cell(const Vec3& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x() * inv_cell_)),
            static_cast<std::int64_t>(std::floor(p.y() * inv_cell_)),
            static_cast<std::int64_t>(std::floor(p.z() * inv_cell_))};
  }
  static std::uint64_t key(std::int64_t x, std::int64_t y, std::int64_t z) {
    const auto m = [](std::int64_t v) { return static_cast<std::uint64_t>(v + (1 << 20)) & 0x1fffff; };
    return (m(x) << 42) | (m(y) << 21) | m(z);
  }

  double radius_;
  double inv_cell_;
  std::unordered_map<std::uint64_t, std::vector<Vec3>> cells_;
};

std::vector<double> triangle_areas(const TetDomain& d) {
  std::vector<double> areas;
  areas.reserve(d.boundary_tris.size());
  for (const auto& t : d.boundary_tris) {
    const Vec3& a = d.vertices[t[0]];
    areas.push_back(0.5 * (d.vertices[t[1]] - a).cross(d.vertices[t[2]] - a).norm());
  }
  return areas;
}

Vec3 random_point_in_triangle(const TetDomain& d, int tri, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double s = u(rng), t = u(rng);
  if (s + t > 1.0) {
    s = 1.0 - s;
    t = 1.0 - t;
  }
  const auto& f = d.boundary_tris[tri];
  const Vec3& a = d.vertices[f[0]];
  return a + s * (d.vertices[f[1]] - a) + t * (d.vertices[f[2]] - a);
}

}  // namespace

std::vector<SurfacePoint> concave_edge_points(const TetDomain& domain, double spacing) {
  std::vector<SurfacePoint> out;
  for (const FeatureEdge& fe : domain.feature_edges) {
    if (fe.kind != Sharpness::ConcaveSharp) continue;
    const auto& e = domain.boundary_edges[fe.edge];
    const Vec3& a = domain.vertices[e[0]];
    const Vec3& b = domain.vertices[e[1]];
    const auto& et = domain.edge_tris[fe.edge];
    const Vec3 n = (triangle_normal(domain, et[0]) + triangle_normal(domain, et[1])).normalized();
    const int m = std::max(1, static_cast<int>(std::floor((b - a).norm() / spacing)));
    for (int k = 0; k <= m; ++k) {
      const double t = static_cast<double>(k) / m;
      out.push_back({a + t * (b - a), n, std::min(et[0], et[1])});
    }
  }
  return out;
}

std::vector<SurfacePoint> poisson_disk_samples(const TetDomain& domain, double radius,
                                               std::uint64_t seed) {
  std::vector<SurfacePoint> pins;
  if (domain.boundary_tris.empty() || !(radius > 0.0)) return pins;
  SpacingGrid grid(radius);
  auto try_add = [&](const SurfacePoint& p) {
    if (!grid.accepts(p.position)) return;
    grid.insert(p.position);
    pins.push_back(p);
  };

  for (const SurfacePoint& p : concave_edge_points(domain, radius)) try_add(p);

  const std::vector<double> areas = triangle_areas(domain);
  double total = 0.0;
  for (double a : areas) total += a;
  std::vector<Vec3> normals;
  normals.reserve(areas.size());
  for (int t = 0; t < static_cast<int>(areas.size()); ++t) normals.push_back(triangle_normal(domain, t));

  // Dart throwing.
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick(areas.begin(), areas.end());
  const double expected = total / (0.25 * std::numbers::pi * radius * radius);
  const std::size_t darts = static_cast<std::size_t>(std::max(1000.0, 30.0 * expected));
  for (std::size_t i = 0; i < darts; ++i) {
    const int tri = pick(rng);
    try_add({random_point_in_triangle(domain, tri, rng), normals[tri], tri});
  }

  // Fill the remaining gaps with a dense barycentric lattice per triangle.
  const double step = kPoissonFillStep * radius;
  for (int tri = 0; tri < static_cast<int>(domain.boundary_tris.size()); ++tri) {
    const auto& f = domain.boundary_tris[tri];
    const Vec3& a = domain.vertices[f[0]];
    const Vec3& b = domain.vertices[f[1]];
    const Vec3& c = domain.vertices[f[2]];
    const double longest = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
    const int m = std::max(1, static_cast<int>(std::ceil(longest / step)));
    for (int i = 0; i <= m; ++i)
      for (int j = 0; i + j <= m; ++j) {
        const Vec3 p = a + (double(i) / m) * (b - a) + (double(j) / m) * (c - a);
        try_add({p, normals[tri], tri});
      }
  }
  return pins;
}

std::vector<SurfacePoint> poisson_disk_pins(const TetDomain& domain, double gamma,
                                            std::uint64_t seed) {
  return poisson_disk_samples(domain, domain.bbox_diag / gamma, seed);
}

std::vector<SurfacePoint> uniform_surface_samples(const TetDomain& domain, std::size_t count,
                                                  std::uint64_t seed) {
  std::vector<SurfacePoint> out;
  if (domain.boundary_tris.empty()) return out;
  const std::vector<double> areas = triangle_areas(domain);
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick(areas.begin(), areas.end());
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int tri = pick(rng);
    out.push_back({random_point_in_triangle(domain, tri, rng), triangle_normal(domain, tri), tri});
  }
  return out;
}

}  // namespace medial
