#include "medial/rpd.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "medial/geom/knn.hpp"

namespace medial {

std::string_view to_string(SphereClass klass) {
  switch (klass) {
    case SphereClass::T2_sheet: return "T2_sheet";
    case SphereClass::T3_seam: return "T3_seam";
    case SphereClass::T4_junction: return "T4_junction";
    case SphereClass::T1_2_feature_edge: return "T1_2_feature_edge";
    case SphereClass::T1_3_corner: return "T1_3_corner";
    case SphereClass::T1_spike: return "T1_spike";
    case SphereClass::unknown: return "unknown";
  }
  return "unknown";
}

Plane power_bisector(const Sphere& a, const Sphere& b, int b_index) {
  const Vec3 u = b.center - a.center;
  const double d = u.norm();
  const Vec3 n = u / d;
  const double t = (d * d + a.radius * a.radius - b.radius * b.radius) / (2.0 * d);
  return {n, -n.dot(a.center) - t, {PlaneTag::Kind::Bisector, b_index}};
}

bool PowerCell::contains(const Vec3& x, double eps) const {
  for (const auto& piece : pieces) {
    bool inside = true;
    for (const Plane& p : piece.planes())
      if (p.signed_distance(x) > eps) {
        inside = false;
        break;
      }
    if (inside) return true;
  }
  return false;
}

const BisectorFace* PowerCell::face_with(int neighbor) const {
  auto it = std::lower_bound(faces.begin(), faces.end(), neighbor,
                             [](const BisectorFace& f, int n) { return f.neighbor < n; });
  return it != faces.end() && it->neighbor == neighbor ? &*it : nullptr;
}

// ---------------------------------------------------------------------------
// Tet AABB tree

struct RpdContext::TetTree {
  struct Node {
    Eigen::AlignedBox3d box;
    int left = -1, right = -1, begin = 0, end = 0;
  };
  std::vector<Eigen::AlignedBox3d> boxes;
  std::vector<int> order;
  std::vector<Node> nodes;

  int build(int begin, int end) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    Eigen::AlignedBox3d box;
    for (int i = begin; i < end; ++i) box.extend(boxes[order[i]]);
    nodes[id].box = box;
    if (end - begin <= 4) {
      nodes[id].begin = begin;
      nodes[id].end = end;
      return id;
    }
    int axis = 0;
    box.sizes().maxCoeff(&axis);
    const int mid = (begin + end) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end, [&](int a, int b) {
      const double ca = boxes[a].center()[axis], cb = boxes[b].center()[axis];
      return ca < cb || (ca == cb && a < b);
    });
    const int l = build(begin, mid);
    const int r = build(mid, end);
    nodes[id].left = l;
    nodes[id].right = r;
    return id;
  }
};

RpdContext::RpdContext(const TetDomain& domain)
    : domain_(domain), surface_(domain), tree_(std::make_unique<TetTree>()) {
  auto& t = *tree_;
  for (const auto& tet : domain.tets) {
    Eigen::AlignedBox3d box;
    for (int v : tet) box.extend(domain.vertices[v]);
    t.boxes.push_back(box);
  }
  t.order.resize(t.boxes.size());
  std::iota(t.order.begin(), t.order.end(), 0);
  if (!t.boxes.empty()) t.build(0, static_cast<int>(t.boxes.size()));
}

RpdContext::~RpdContext() = default;

std::vector<int> RpdContext::tets_overlapping(const Eigen::AlignedBox3d& box) const {
  std::vector<int> out;
  const auto& t = *tree_;
  if (t.nodes.empty()) return out;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const auto& node = t.nodes[stack.back()];
    stack.pop_back();
    if (!node.box.intersects(box)) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i)
        if (t.boxes[t.order[i]].intersects(box)) out.push_back(t.order[i]);
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool RpdContext::contains(const Vec3& x) const {
  const double eps = domain_.eps();
  const Eigen::AlignedBox3d box(x - Vec3::Constant(eps), x + Vec3::Constant(eps));
  for (int t : tets_overlapping(box)) {
    const auto& tet = domain_.tets[t];
    const Vec3& a = domain_.vertices[tet[0]];
    Mat3 m;
    for (int k = 0; k < 3; ++k) m.col(k) = domain_.vertices[tet[k + 1]] - a;
    const Vec3 l = m.colPivHouseholderQr().solve(x - a);
    const double l0 = 1.0 - l.sum();
    const double tol = eps / std::max(m.colwise().norm().maxCoeff(), eps);
    if (l.minCoeff() >= -tol && l0 >= -tol) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Power cells

namespace {

/// Unrestricted power cell of sphere i inside `bounds`, or an empty piece.
ConvexCellPiece unrestricted_cell(int i, std::span<const Sphere> spheres, const KdTree& tree,
                                  const std::vector<char>& duplicate, double r_max,
                                  const ConvexCellPiece& bounds, double eps) {
  const Sphere& si = spheres[i];
  const int n = static_cast<int>(spheres.size());
  ConvexCellPiece piece = bounds;
  int k = std::min(24, n - 1);
  std::vector<int> candidates = tree.nearest(si.center, k, i);
  std::size_t next = 0;
  const double c = si.radius * si.radius - r_max * r_max;
  while (true) {
    bool safe = false;
    for (; next < candidates.size(); ++next) {
      const int j = candidates[next];
      if (duplicate[j]) continue;
      const Sphere& sj = spheres[j];
      const double d = (sj.center - si.center).norm();
      if (d == 0.0) {
        if (sj.radius > si.radius) return {};
        continue;
      }
      double reach2 = 0.0;
      for (const Vec3& v : piece.vertices()) reach2 = std::max(reach2, (v - si.center).squaredNorm());
      if (d * d + c >= 2.0 * d * std::sqrt(reach2)) {
        safe = true;
        break;
      }
      piece.clip(power_bisector(si, sj, j), eps);
      if (piece.empty()) return piece;
    }
    if (safe || static_cast<int>(candidates.size()) >= n - 1) break;
    k = std::min(2 * k, n - 1);
    candidates = tree.nearest(si.center, k, i);
  }
  return piece;
}

void summarize(PowerCell& cell, double eps) {
  std::map<int, double> areas;
  std::map<std::pair<int, int>, double> lengths;
  std::set<std::array<int, 3>> vertices;
  double boundary_area = 0.0;
  cell.volume = 0.0;
  for (const auto& piece : cell.pieces) {
    cell.volume += piece.volume();
    const auto& planes = piece.planes();
    for (const auto& f : piece.faces()) {
      if (f.tag.kind == PlaneTag::Kind::Bisector) areas[f.tag.id] += f.area;
      if (f.tag.kind == PlaneTag::Kind::Boundary) boundary_area += f.area;
    }
    for (const auto& e : piece.edges()) {
      const PlaneTag& a = planes[e.plane_a].tag;
      const PlaneTag& b = planes[e.plane_b].tag;
      if (a.kind != PlaneTag::Kind::Bisector || b.kind != PlaneTag::Kind::Bisector) continue;
      lengths[{std::min(a.id, b.id), std::max(a.id, b.id)}] += e.length;
    }
    for (const auto& corner : piece.vertex_planes()) {
      std::array<int, 3> ids{};
      bool all = true;
      for (int k = 0; k < 3; ++k) {
        const PlaneTag& t = planes[corner[k]].tag;
        all = all && t.kind == PlaneTag::Kind::Bisector;
        ids[k] = t.id;
      }
      if (!all) continue;
      std::sort(ids.begin(), ids.end());
      if (ids[0] != ids[1] && ids[1] != ids[2]) vertices.insert(ids);
    }
  }
  cell.faces.clear();
  cell.neighbor_ids.clear();
  for (const auto& [j, area] : areas) {
    cell.faces.push_back({j, area, {}});
    if (area > eps * eps) cell.neighbor_ids.push_back(j);
  }
  cell.power_edges.clear();
  for (const auto& [jk, len] : lengths) cell.power_edges.push_back({jk.first, jk.second, len});
  cell.power_vertices.assign(vertices.begin(), vertices.end());
  cell.touches_boundary = boundary_area > eps * eps;
}

}  // namespace

std::vector<PowerCell> compute_rpd(const RpdContext& ctx, std::span<const Sphere> spheres) {
  const TetDomain& domain = ctx.domain();
  const int n = static_cast<int>(spheres.size());
  const double eps = ctx.eps();
  std::vector<PowerCell> cells(n);
  if (n == 0) return cells;

  // Exact duplicates: keep the lowest index.
  std::vector<char> duplicate(n, 0);
  {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto key = [&](int i) {
      const auto& s = spheres[i];
      return std::make_tuple(s.center.x(), s.center.y(), s.center.z(), s.radius, i);
    };
    std::sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });
    for (int k = 1; k < n; ++k) {
      const auto& a = spheres[order[k - 1]];
      const auto& b = spheres[order[k]];
      if (a.center == b.center && a.radius == b.radius) duplicate[order[k]] = 1;
    }
  }

  std::vector<Vec3> centers;
  centers.reserve(n);
  double r_max = 0.0;
  for (const auto& s : spheres) {
    centers.push_back(s.center);
    r_max = std::max(r_max, s.radius);
  }
  const KdTree tree(centers);
  const Vec3 margin = Vec3::Constant(1e-3 * domain.bbox_diag);
  const ConvexCellPiece bounds = ConvexCellPiece::box(domain.bbox_min - margin, domain.bbox_max + margin);

  parallel_for(n, [&](std::size_t idx) {
    const int i = static_cast<int>(idx);
    PowerCell& cell = cells[i];
    cell.sphere_id = i;
    if (duplicate[i]) return;
    const ConvexCellPiece hull = unrestricted_cell(i, spheres, tree, duplicate, r_max, bounds, eps);
    if (hull.empty()) return;

    // Bisector planes still supporting the cell.
    std::vector<char> active(hull.planes().size(), 0);
    for (const auto& corner : hull.vertex_planes())
      for (int p : corner) active[p] = 1;
    std::vector<Plane> clip_planes;
    for (std::size_t p = 0; p < active.size(); ++p)
      if (active[p] && hull.planes()[p].tag.kind == PlaneTag::Kind::Bisector)
        clip_planes.push_back(hull.planes()[p]);

    Eigen::AlignedBox3d box;
    for (const Vec3& v : hull.vertices()) box.extend(v);
    box.min() -= Vec3::Constant(eps);
    box.max() += Vec3::Constant(eps);

    for (int t : ctx.tets_overlapping(box)) {
      const auto& tet = domain.tets[t];
      std::array<Vec3, 4> v;
      std::array<PlaneTag, 4> tags;
      for (int f = 0; f < 4; ++f) {
        v[f] = domain.vertices[tet[f]];
        const int tri = domain.tet_face_boundary[t][f];
        tags[f] = tri >= 0 ? PlaneTag{PlaneTag::Kind::Boundary, tri} : PlaneTag{PlaneTag::Kind::TetInternal, t};
      }
      ConvexCellPiece piece = ConvexCellPiece::tetrahedron(v, tags);
      for (const Plane& p : clip_planes) {
        piece.clip(p, eps);
        if (piece.empty()) break;
      }
      if (piece.empty() || piece.volume() <= 0.0) continue;
      piece.source_tet = t;
      cell.pieces.push_back(std::move(piece));
    }
    summarize(cell, eps);
  });
  return cells;
}

std::vector<PowerCell> compute_rpd(const TetDomain& domain, std::span<const Sphere> spheres) {
  const RpdContext ctx(domain);
  return compute_rpd(ctx, spheres);
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

CellSample make_sample(const Vec3& x, const ClosestPointIndex& surface, double weight) {
  CellSample s;
  s.x = x;
  s.foot = surface.closest_point(x);
  s.weight = weight;
  const Vec3 d = s.foot.position - x;
  const double len = d.norm();
  s.n = len > 0.0 ? Vec3(d / len) : s.foot.normal;
  return s;
}

Vec3 uniform_in_tet(const std::array<Vec3, 4>& t, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::array<double, 3> c{u(rng), u(rng), u(rng)};
  std::sort(c.begin(), c.end());
  return c[0] * t[0] + (c[1] - c[0]) * t[1] + (c[2] - c[1]) * t[2] + (1.0 - c[2]) * t[3];
}

Vec3 uniform_in_triangle(const Vec3& a, const Vec3& b, const Vec3& c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double s = u(rng), t = u(rng);
  if (s + t > 1.0) {
    s = 1.0 - s;
    t = 1.0 - t;
  }
  return a + s * (b - a) + t * (c - a);
}

double tet_volume(const std::array<Vec3, 4>& t) {
  return std::abs((t[1] - t[0]).dot((t[2] - t[0]).cross(t[3] - t[0]))) / 6.0;
}

}  // namespace

void sample_cell(PowerCell& cell, const ClosestPointIndex& surface, const SamplingOptions& options,
                 std::uint64_t seed) {
  cell.samples.clear();
  for (auto& f : cell.faces) f.samples.clear();
  if (cell.empty() || !(cell.volume > 0.0)) return;
  std::mt19937_64 rng(seed);

  for (const auto& piece : cell.pieces) {
    const double vol = piece.volume();
    const int count = std::max(options.min_per_piece,
                               static_cast<int>(std::lround(options.samples_per_cell * vol / cell.volume)));
    const double weight = vol / count;
    cell.samples.push_back(make_sample(piece.centroid(), surface, weight));
    const auto tets = piece.fan_tets();
    std::vector<double> vols;
    for (const auto& t : tets) vols.push_back(tet_volume(t));
    if (std::accumulate(vols.begin(), vols.end(), 0.0) <= 0.0) continue;
    std::discrete_distribution<int> pick(vols.begin(), vols.end());
    for (int k = 1; k < count; ++k) cell.samples.push_back(make_sample(uniform_in_tet(tets[pick(rng)], rng), surface, weight));
  }

  // Bisector faces, owned by the lower sphere id of each pair.
  for (auto& face : cell.faces) {
    if (face.neighbor < cell.sphere_id || !(face.area > 0.0)) continue;
    for (const auto& piece : cell.pieces) {
      const auto& verts = piece.vertices();
      for (const auto& f : piece.faces()) {
        if (f.tag.kind != PlaneTag::Kind::Bisector || f.tag.id != face.neighbor || !(f.area > 0.0)) continue;
        Vec3 centroid = Vec3::Zero();
        for (int v : f.loop) centroid += verts[v];
        centroid /= static_cast<double>(f.loop.size());
        face.samples.push_back(make_sample(centroid, surface, 0.0));
        const int extra = static_cast<int>(std::lround(options.samples_per_face * f.area / face.area));
        std::vector<double> areas;
        for (std::size_t k = 1; k + 1 < f.loop.size(); ++k)
          areas.push_back((verts[f.loop[k]] - verts[f.loop[0]]).cross(verts[f.loop[k + 1]] - verts[f.loop[0]]).norm());
        if (extra <= 0 || std::accumulate(areas.begin(), areas.end(), 0.0) <= 0.0) continue;
        std::discrete_distribution<int> pick(areas.begin(), areas.end());
        for (int s = 0; s < extra; ++s) {
          const int k = pick(rng) + 1;
          face.samples.push_back(make_sample(
              uniform_in_triangle(verts[f.loop[0]], verts[f.loop[k]], verts[f.loop[k + 1]], rng), surface, 0.0));
        }
      }
    }
  }
}

void sample_cells(std::vector<PowerCell>& cells, const ClosestPointIndex& surface,
                  const SamplingOptions& options, std::uint64_t seed) {
  parallel_for(cells.size(), [&](std::size_t i) { sample_cell(cells[i], surface, options, mix_seed(seed, i)); });
}

// ---------------------------------------------------------------------------
// Clustering

double cluster_distance(double radius) { return 2.0 * radius * std::sin(0.5 * kClusterAngle); }

bool same_subvolume(const CellSample& a, const CellSample& b, double delta, const std::vector<int>& tri_patch) {
  static const double cos_angle = std::cos(kClusterAngle);
  if (a.n.dot(b.n) > cos_angle) return true;
  if ((a.foot.position - b.foot.position).norm() >= delta) return false;
  if (a.foot.tri < 0 || b.foot.tri < 0 || tri_patch.empty()) return true;
  return tri_patch[a.foot.tri] == tri_patch[b.foot.tri];
}

Clusters cluster_samples(std::span<const CellSample> samples, double delta, const std::vector<int>& tri_patch) {
  const int m = static_cast<int>(samples.size());
  std::vector<int> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      const int ra = find(a), rb = find(b);
      if (ra == rb) continue;
      if (same_subvolume(samples[a], samples[b], delta, tri_patch)) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
  std::map<int, std::vector<int>> groups;
  for (int a = 0; a < m; ++a) groups[find(a)].push_back(a);
  Clusters out;
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.size() > y.size(); });
  return out;
}

Clusters subvolume_clusters(const PowerCell& cell, double radius, const TetDomain& domain) {
  if (cell.samples.empty()) throw std::invalid_argument("subvolume_clusters: cell has no samples");
  return cluster_samples(cell.samples, cluster_distance(radius), domain.tri_patch);
}

// ---------------------------------------------------------------------------
// Dual mesh

int MedialMesh::find_edge(int a, int b) const {
  if (a > b) std::swap(a, b);
  auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(a, b),
                             [](const MedialEdge& e, const std::pair<int, int>& k) {
                               return std::make_pair(e.a, e.b) < k;
                             });
  return it != edges.end() && it->a == a && it->b == b ? static_cast<int>(it - edges.begin()) : -1;
}

int MedialMesh::find_face(int a, int b, int c) const {
  std::array<int, 3> k{a, b, c};
  std::sort(k.begin(), k.end());
  auto it = std::lower_bound(faces.begin(), faces.end(), k,
                             [](const MedialFace& f, const std::array<int, 3>& key) { return f.v < key; });
  return it != faces.end() && it->v == k ? static_cast<int>(it - faces.begin()) : -1;
}

std::size_t MedialMesh::valid_edge_count() const {
  return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(), [](const auto& e) { return e.valid; }));
}

std::size_t MedialMesh::valid_face_count() const {
  return static_cast<std::size_t>(std::count_if(faces.begin(), faces.end(), [](const auto& f) { return f.valid; }));
}

MedialMesh dual_medial_mesh(std::span<const PowerCell> cells, std::span<const Sphere> spheres, double eps) {
  MedialMesh mesh;
  mesh.spheres.assign(spheres.begin(), spheres.end());
  mesh.touches_boundary.assign(spheres.size(), 0);
  std::set<std::pair<int, int>> edges;
  std::set<std::array<int, 3>> faces;
  std::set<std::array<int, 4>> tets;
  for (const auto& cell : cells) {
    const int i = cell.sphere_id;
    if (i < 0 || cell.empty()) continue;
    mesh.touches_boundary[i] = cell.touches_boundary;
    for (int j : cell.neighbor_ids) edges.insert({std::min(i, j), std::max(i, j)});
    for (const auto& pe : cell.power_edges) {
      if (!(pe.length > eps)) continue;
      std::array<int, 3> f{i, pe.j, pe.k};
      std::sort(f.begin(), f.end());
      faces.insert(f);
    }
    for (const auto& pv : cell.power_vertices) {
      std::array<int, 4> t{i, pv[0], pv[1], pv[2]};
      std::sort(t.begin(), t.end());
      tets.insert(t);
    }
  }
  for (const auto& [a, b] : edges) mesh.edges.push_back({a, b, true});
  for (const auto& f : faces)
    if (edges.count({f[0], f[1]}) && edges.count({f[0], f[2]}) && edges.count({f[1], f[2]}))
      mesh.faces.push_back({f, true, -1});
  for (const auto& t : tets) {
    if (mesh.find_face(t[0], t[1], t[2]) >= 0 && mesh.find_face(t[0], t[1], t[3]) >= 0 &&
        mesh.find_face(t[0], t[2], t[3]) >= 0 && mesh.find_face(t[1], t[2], t[3]) >= 0)
      mesh.cells.push_back(t);
  }
  return mesh;
}

void write_cells_ply(std::span<const PowerCell> cells, const std::filesystem::path& path) {
  std::vector<Vec3> verts;
  struct Poly {
    std::vector<int> loop;
    int sphere, kind, id;
  };
  std::vector<Poly> polys;
  for (const auto& cell : cells)
    for (const auto& piece : cell.pieces) {
      const int base = static_cast<int>(verts.size());
      verts.insert(verts.end(), piece.vertices().begin(), piece.vertices().end());
      for (const auto& f : piece.faces()) {
        Poly p{{}, cell.sphere_id, static_cast<int>(f.tag.kind), f.tag.id};
        for (int v : f.loop) p.loop.push_back(base + v);
        polys.push_back(std::move(p));
      }
    }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "ply\nformat ascii 1.0\n";
  out << "comment tag_kind: 0 boundary, 1 bisector, 2 tet-internal, 3 bounds\n";
  out << "element vertex " << verts.size() << "\nproperty double x\nproperty double y\nproperty double z\n";
  out << "element face " << polys.size()
      << "\nproperty list uchar int vertex_indices\nproperty int sphere\nproperty int tag_kind\nproperty int tag_id\n"
      << "end_header\n";
  out.precision(17);
  for (const Vec3& v : verts) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& p : polys) {
    out << p.loop.size();
    for (int v : p.loop) out << ' ' << v;
    out << ' ' << p.sphere << ' ' << p.kind << ' ' << p.id << '\n';
  }
}

}  // namespace medial
