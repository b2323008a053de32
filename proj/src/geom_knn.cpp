#include "medial/geom/knn.hpp"

#include <algorithm>
#include <numeric>
#include <limits>
#include <queue>

namespace medial {

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) build(0, static_cast<int>(points_.size()), 0);
}

int KdTree::build(int begin, int end, int depth) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= 8) return id;

  Vec3 lo = points_[order_[begin]], hi = lo;
  for (int i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] - lo[axis] <= 0) return id;
  const int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double pa = points_[a][axis], pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const int left = build(begin, mid, depth + 1);
  const int right = build(mid, end, depth + 1);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<int> KdTree::nearest(const Vec3& q, int k, int exclude) const {
  std::vector<int> result;
  if (k <= 0 || nodes_.empty()) return result;
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry> heap;  // max-heap on (d2, index)
  auto worst = [&] { return heap.size() < static_cast<std::size_t>(k) ? std::numeric_limits<double>::infinity() : heap.top().first; };

  auto visit = [&](auto&& self, int id) -> void {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int p = order_[i];
        if (p == exclude) continue;
        const Entry e{(points_[p] - q).squaredNorm(), p};
        if (heap.size() < static_cast<std::size_t>(k)) {
          heap.push(e);
        } else if (e < heap.top()) {
          heap.pop();
          heap.push(e);
        }
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const int near = diff < 0 ? node.left : node.right;
    const int far = diff < 0 ? node.right : node.left;
    self(self, near);
    if (diff * diff <= worst()) self(self, far);
  };
  visit(visit, 0);

  result.resize(heap.size());
  for (int i = static_cast<int>(heap.size()) - 1; i >= 0; --i) {
    result[i] = heap.top().second;
    heap.pop();
  }
  return result;
}

std::vector<int> KdTree::within(const Vec3& q, double radius) const {
  std::vector<std::pair<double, int>> hits;
  if (nodes_.empty()) return {};
  const double r2 = radius * radius;
  auto visit = [&](auto&& self, int id) -> void {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int p = order_[i];
        const double d2 = (points_[p] - q).squaredNorm();
        if (d2 <= r2) hits.emplace_back(d2, p);
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    if (diff <= radius) self(self, node.left);
    if (diff >= -radius) self(self, node.right);
  };
  visit(visit, 0);
  std::sort(hits.begin(), hits.end());
  std::vector<int> out;
  out.reserve(hits.size());
  for (const auto& h : hits) out.push_back(h.second);
  return out;
}

std::vector<std::vector<int>> knn(std::span<const Vec3> centers, int k) {
  const KdTree tree(centers);
  std::vector<std::vector<int>> out(centers.size());
  parallel_for(centers.size(), [&](std::size_t i) {
    out[i] = tree.nearest(centers[i], k, static_cast<int>(i));
  });
  return out;
}

}  // namespace medial
