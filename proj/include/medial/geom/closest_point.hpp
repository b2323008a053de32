#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Geometry>

#include "medial/common.hpp"
#include "medial/mesh_io.hpp"

namespace medial {

/// A point on the boundary surface with its outward facet normal.
struct SurfacePoint {
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  int tri = -1;
};

/// Closest point to p on triangle (a, b, c).
template <typename Derived>
Vector3<typename Derived::Scalar> closest_point_on_triangle(const Eigen::MatrixBase<Derived>& p,
                                                            const Eigen::MatrixBase<Derived>& a,
                                                            const Eigen::MatrixBase<Derived>& b,
                                                            const Eigen::MatrixBase<Derived>& c) {
  using Scalar = typename Derived::Scalar;
  using V = Vector3<Scalar>;
  const V ab = b - a, ac = c - a, ap = p - a;
  const Scalar d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const V bp = p - b;
  const Scalar d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const Scalar vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;
  const V cp = p - c;
  const Scalar d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const Scalar vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;
  const Scalar va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  const Scalar denom = Scalar(1) / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

/// Exact closest-point queries against the boundary triangles, BVH accelerated.
/// Ties are broken toward the lowest triangle index.
class ClosestPointIndex {
 public:
  explicit ClosestPointIndex(const TetDomain& domain);

  SurfacePoint closest_point(const Vec3& x) const;
  double distance(const Vec3& x) const { return (closest_point(x).position - x).norm(); }

  /// Closest point over triangles accepted by `keep(tri, closest_point_on_tri)`.
  std::optional<SurfacePoint> closest_point_if(
      const Vec3& x, const std::function<bool(int, const Vec3&)>& keep) const;

  /// Closest point restricted to the listed triangles (brute force).
  std::optional<SurfacePoint> closest_point_among(const Vec3& x, std::span<const int> tris) const;

  SurfacePoint point_on_triangle(int tri, const Vec3& x) const;
  std::size_t triangle_count() const { return tris_.size(); }
  const Vec3& triangle_normal(int tri) const { return normals_[tri]; }
  std::array<Vec3, 3> triangle(int tri) const;

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    int left = -1, right = -1;  // children, or -1 for leaves
    int begin = 0, end = 0;     // range into order_ for leaves
  };
  int build(int begin, int end);
  template <typename Keep>
  void query(const Vec3& x, const Keep& keep, double& best_d2, int& best_tri, Vec3& best_p) const;

  std::vector<Vec3> verts_;
  std::vector<std::array<int, 3>> tris_;
  std::vector<Vec3> normals_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

/// Closest-point oracle used by the sphere-shrinking solver; lets tests plug in
/// analytic surfaces.
using ClosestPointFn = std::function<SurfacePoint(const Vec3&)>;

inline ClosestPointFn as_oracle(const ClosestPointIndex& index) {
  return [&index](const Vec3& x) { return index.closest_point(x); };
}

}  // namespace medial
