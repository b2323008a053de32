#pragma once

#include <span>
#include <vector>

#include "medial/common.hpp"

namespace medial {

/// Static kd-tree over a point set. Results are ordered by distance, ties by index.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points);

  /// Up to k nearest indices, skipping `exclude`.
  std::vector<int> nearest(const Vec3& q, int k, int exclude = -1) const;
  /// All indices within `radius` (inclusive), sorted by distance.
  std::vector<int> within(const Vec3& q, double radius) const;

  std::size_t size() const { return points_.size(); }
  const Vec3& point(int i) const { return points_[i]; }

 private:
  struct Node {
    int begin = 0, end = 0;
    int axis = -1;  // -1 for leaves
    double split = 0.0;
    int left = -1, right = -1;
  };
  int build(int begin, int end, int depth);

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

/// k nearest other centers for every center.
std::vector<std::vector<int>> knn(std::span<const Vec3> centers, int k);

}  // namespace medial
