#include "medial/geom/closest_point.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace medial {

ClosestPointIndex::ClosestPointIndex(const TetDomain& domain)
    : verts_(domain.vertices), tris_(domain.boundary_tris) {
  normals_.reserve(tris_.size());
  for (int t = 0; t < static_cast<int>(tris_.size()); ++t) normals_.push_back(medial::triangle_normal(domain, t));
  order_.resize(tris_.size());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * tris_.size());
  if (!tris_.empty()) build(0, static_cast<int>(tris_.size()));
}

std::array<Vec3, 3> ClosestPointIndex::triangle(int tri) const {
  const auto& t = tris_[tri];
  return {verts_[t[0]], verts_[t[1]], verts_[t[2]]};
}

int ClosestPointIndex::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Eigen::AlignedBox3d box;
  for (int i = begin; i < end; ++i)
    for (int v : tris_[order_[i]]) box.extend(verts_[v]);
  nodes_[id].box = box;

  if (end - begin <= 4) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  int axis = 0;
  box.sizes().maxCoeff(&axis);
  auto centroid = [&](int t) {
    const auto& tri = tris_[t];
    return (verts_[tri[0]][axis] + verts_[tri[1]][axis] + verts_[tri[2]][axis]);
  };
  const int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double ca = centroid(a), cb = centroid(b);
                     return ca < cb || (ca == cb && a < b);
                   });
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

template <typename Keep>
void ClosestPointIndex::query(const Vec3& x, const Keep& keep, double& best_d2, int& best_tri,
                              Vec3& best_p) const {
  if (nodes_.empty()) return;
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.box.squaredExteriorDistance(x) > best_d2) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int t = order_[i];
        const auto& tri = tris_[t];
        const Vec3 p = closest_point_on_triangle(x, verts_[tri[0]], verts_[tri[1]], verts_[tri[2]]);
        const double d2 = (p - x).squaredNorm();
        if (d2 < best_d2 || (d2 == best_d2 && t < best_tri)) {
          if (!keep(t, p)) continue;
          best_d2 = d2;
          best_tri = t;
          best_p = p;
        }
      }
      continue;
    }
    const double dl = nodes_[node.left].box.squaredExteriorDistance(x);
    const double dr = nodes_[node.right].box.squaredExteriorDistance(x);
    // Push the farther child first so the nearer one is popped next.
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.left;
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
}

SurfacePoint ClosestPointIndex::closest_point(const Vec3& x) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  int best_tri = std::numeric_limits<int>::max();
  Vec3 best_p = Vec3::Zero();
  query(x, [](int, const Vec3&) { return true; }, best_d2, best_tri, best_p);
  return {best_p, normals_[best_tri], best_tri};
}

std::optional<SurfacePoint> ClosestPointIndex::closest_point_if(
    const Vec3& x, const std::function<bool(int, const Vec3&)>& keep) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  int best_tri = std::numeric_limits<int>::max();
  Vec3 best_p = Vec3::Zero();
  query(x, keep, best_d2, best_tri, best_p);
  if (best_tri == std::numeric_limits<int>::max()) return std::nullopt;
  return SurfacePoint{best_p, normals_[best_tri], best_tri};
}

std::optional<SurfacePoint> ClosestPointIndex::closest_point_among(const Vec3& x,
                                                                   std::span<const int> tris) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  int best_tri = -1;
  Vec3 best_p = Vec3::Zero();
  for (int t : tris) {
    const auto& tri = tris_[t];
    const Vec3 p = closest_point_on_triangle(x, verts_[tri[0]], verts_[tri[1]], verts_[tri[2]]);
    const double d2 = (p - x).squaredNorm();
    if (d2 < best_d2 || (d2 == best_d2 && t < best_tri)) {
      best_d2 = d2;
      best_tri = t;
      best_p = p;
    }
  }
  if (best_tri < 0) return std::nullopt;
  return SurfacePoint{best_p, normals_[best_tri], best_tri};
}

SurfacePoint ClosestPointIndex::point_on_triangle(int tri, const Vec3& x) const {
  const auto& t = tris_[tri];
  return {closest_point_on_triangle(x, verts_[t[0]], verts_[t[1]], verts_[t[2]]), normals_[tri], tri};
}

}  // namespace medial
