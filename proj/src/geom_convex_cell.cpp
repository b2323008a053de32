#include "medial/geom/convex_cell.hpp"

#include <algorithm>

namespace medial {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

using EdgeTable = std::vector<std::pair<std::uint64_t, int>>;

EdgeTable build_edge_table(const std::vector<std::array<int, 3>>& corners) {
  EdgeTable table;
  table.reserve(3 * corners.size());
  for (int v = 0; v < static_cast<int>(corners.size()); ++v) {
    const auto& c = corners[v];
    table.emplace_back(edge_key(c[0], c[1]), v);
    table.emplace_back(edge_key(c[1], c[2]), v);
    table.emplace_back(edge_key(c[0], c[2]), v);
  }
  std::sort(table.begin(), table.end());
  return table;
}

/// The vertex other than `v` on the edge between planes a and b, or -1.
int across(const EdgeTable& table, int a, int b, int v) {
  const std::uint64_t key = edge_key(a, b);
  auto it = std::lower_bound(table.begin(), table.end(), std::make_pair(key, -1));
  for (; it != table.end() && it->first == key; ++it)
    if (it->second != v) return it->second;
  return -1;
}

}  // namespace

ConvexCellPiece ConvexCellPiece::tetrahedron(const std::array<Vec3, 4>& v,
                                             const std::array<PlaneTag, 4>& tags) {
  ConvexCellPiece piece;
  for (int f = 0; f < 4; ++f) {
    const Vec3& a = v[(f + 1) % 4];
    const Vec3& b = v[(f + 2) % 4];
    const Vec3& c = v[(f + 3) % 4];
    Vec3 n = (b - a).cross(c - a);
    const double len = n.norm();
    n = len > 0 ? Vec3(n / len) : Vec3::UnitZ();
    if (n.dot(v[f] - a) > 0) n = -n;
    piece.planes_.push_back({n, -n.dot(a), tags[f]});
  }
  for (int k = 0; k < 4; ++k) {
    std::array<int, 3> c{};
    int m = 0;
    for (int f = 0; f < 4; ++f)
      if (f != k) c[m++] = f;
    piece.corners_.push_back(c);
    piece.verts_.push_back(v[k]);
  }
  return piece;
}

ConvexCellPiece ConvexCellPiece::box(const Vec3& lo, const Vec3& hi) {
  ConvexCellPiece piece;
  for (int axis = 0; axis < 3; ++axis) {
    const Vec3 e = Vec3::Unit(axis);
    piece.planes_.push_back({e, -hi[axis], {}});
    piece.planes_.push_back({-e, lo[axis], {}});
  }
  for (int ix = 0; ix < 2; ++ix)
    for (int iy = 0; iy < 2; ++iy)
      for (int iz = 0; iz < 2; ++iz) {
        piece.corners_.push_back({ix, 2 + iy, 4 + iz});
        piece.verts_.emplace_back(ix == 0 ? hi.x() : lo.x(), iy == 0 ? hi.y() : lo.y(),
                                  iz == 0 ? hi.z() : lo.z());
      }
  return piece;
}

void ConvexCellPiece::clip(const Plane& plane, double eps) {
  const int n = static_cast<int>(verts_.size());
  if (n == 0) return;
  std::vector<double> s(n);
  int conflicts = 0;
  for (int i = 0; i < n; ++i) {
    s[i] = plane.signed_distance(verts_[i]);
    if (s[i] > -eps) ++conflicts;
  }
  if (conflicts == 0) return;
  if (conflicts == n) {
    bool outside = false;
    for (int i = 0; i < n; ++i) outside = outside || s[i] > eps;
    if (!outside) return;  // degenerate piece lying within the plane band
    planes_.clear();
    corners_.clear();
    verts_.clear();
    return;
  }

  const int pid = static_cast<int>(planes_.size());
  planes_.push_back(plane);
  const EdgeTable table = build_edge_table(corners_);

  std::vector<std::array<int, 3>> corners;
  std::vector<Vec3> verts;
  corners.reserve(n + 4);
  verts.reserve(n + 4);
  for (int i = 0; i < n; ++i)
    if (!(s[i] > -eps)) {
      corners.push_back(corners_[i]);
      verts.push_back(verts_[i]);
    }
  for (std::size_t k = 0; k + 1 < table.size(); ++k) {
    if (table[k].first != table[k + 1].first) continue;
    const int u = table[k].second, w = table[k + 1].second;
    const bool cu = s[u] > -eps, cw = s[w] > -eps;
    if (cu == cw) continue;
    const int out = cu ? u : w;
    const int in = cu ? w : u;
    const double t = std::clamp(std::max(s[out], 0.0) / (s[out] - s[in]), 0.0, 1.0);
    const std::uint64_t key = table[k].first;
    corners.push_back({static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu), pid});
    verts.push_back(verts_[out] + t * (verts_[in] - verts_[out]));
    ++k;
  }
  corners_ = std::move(corners);
  verts_ = std::move(verts);
}

std::vector<ConvexCellPiece::Face> ConvexCellPiece::faces() const {
  std::vector<Face> out;
  if (verts_.empty()) return out;
  const EdgeTable table = build_edge_table(corners_);
  std::vector<std::vector<int>> by_plane(planes_.size());
  for (int v = 0; v < static_cast<int>(corners_.size()); ++v)
    for (int p : corners_[v]) by_plane[p].push_back(v);

  for (int p = 0; p < static_cast<int>(planes_.size()); ++p) {
    const auto& members = by_plane[p];
    if (members.size() < 3) continue;
    Face face;
    face.plane = p;
    face.tag = planes_[p].tag;
    face.normal = planes_[p].normal;
    const int start = members.front();
    int v = start;
    auto other_planes = [&](int vertex) {
      std::array<int, 2> o{};
      int m = 0;
      for (int q : corners_[vertex])
        if (q != p && m < 2) o[m++] = q;
      return o;
    };
    int via = other_planes(start)[1];
    for (std::size_t guard = 0; guard <= members.size(); ++guard) {
      face.loop.push_back(v);
      const int next = across(table, p, via, v);
      if (next < 0 || next == start) break;
      const auto o = other_planes(next);
      via = (o[0] == via) ? o[1] : o[0];
      v = next;
    }
    if (face.loop.size() < 3) continue;
    Vec3 newell = Vec3::Zero();
    const Vec3& o = verts_[face.loop[0]];
    for (std::size_t k = 1; k + 1 < face.loop.size(); ++k)
      newell += (verts_[face.loop[k]] - o).cross(verts_[face.loop[k + 1]] - o);
    if (newell.dot(face.normal) < 0) std::reverse(face.loop.begin(), face.loop.end());
    face.area = 0.5 * newell.norm();
    out.push_back(std::move(face));
  }
  return out;
}

std::vector<ConvexCellPiece::Edge> ConvexCellPiece::edges() const {
  std::vector<Edge> out;
  const EdgeTable table = build_edge_table(corners_);
  for (std::size_t k = 0; k + 1 < table.size(); ++k) {
    if (table[k].first != table[k + 1].first) continue;
    const std::uint64_t key = table[k].first;
    Edge e;
    e.plane_a = static_cast<int>(key >> 32);
    e.plane_b = static_cast<int>(key & 0xffffffffu);
    e.v0 = table[k].second;
    e.v1 = table[k + 1].second;
    e.length = (verts_[e.v0] - verts_[e.v1]).norm();
    out.push_back(e);
    ++k;
  }
  return out;
}

std::vector<std::array<Vec3, 4>> ConvexCellPiece::fan_tets() const {
  std::vector<std::array<Vec3, 4>> tets;
  if (verts_.empty()) return tets;
  Vec3 apex = Vec3::Zero();
  for (const Vec3& v : verts_) apex += v;
  apex /= static_cast<double>(verts_.size());
  for (const Face& f : faces())
    for (std::size_t k = 1; k + 1 < f.loop.size(); ++k)
      tets.push_back({apex, verts_[f.loop[0]], verts_[f.loop[k]], verts_[f.loop[k + 1]]});
  return tets;
}

double ConvexCellPiece::volume() const {
  double vol = 0.0;
  for (const auto& t : fan_tets()) vol += (t[1] - t[0]).dot((t[2] - t[0]).cross(t[3] - t[0])) / 6.0;
  return std::max(0.0, vol);
}

Vec3 ConvexCellPiece::centroid() const {
  double vol = 0.0;
  Vec3 acc = Vec3::Zero();
  for (const auto& t : fan_tets()) {
    const double v = (t[1] - t[0]).dot((t[2] - t[0]).cross(t[3] - t[0])) / 6.0;
    vol += v;
    acc += v * 0.25 * (t[0] + t[1] + t[2] + t[3]);
  }
  if (vol > 0) return acc / vol;
  Vec3 mean = Vec3::Zero();
  for (const Vec3& v : verts_) mean += v;
  return verts_.empty() ? mean : Vec3(mean / static_cast<double>(verts_.size()));
}

std::optional<ConvexCellPiece> clip_convex(ConvexCellPiece piece, const Plane& plane, double eps) {
  piece.clip(plane, eps);
  if (piece.empty()) return std::nullopt;
  return piece;
}

}  // namespace medial
