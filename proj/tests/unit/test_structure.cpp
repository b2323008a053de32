#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "medial/fixtures.hpp"
#include "medial/metrics.hpp"
#include "medial/structure.hpp"

using namespace medial;

namespace {

/// Sample whose nearest boundary point is straight up (wall z = 100) or down (wall z = 0).
CellSample slab_sample(const Vec3& x, bool up) {
  CellSample s;
  s.x = x;
  s.n = up ? Vec3(Vec3::UnitZ()) : Vec3(-Vec3::UnitZ());
  s.foot.position = Vec3(x.x(), x.y(), up ? 100.0 : 0.0);
  s.foot.normal = s.n;
  s.weight = 1.0;
  return s;
}

std::vector<CellSample> slab_samples(const Vec3& center, double spread, bool up, bool down, int per_side) {
  std::vector<CellSample> out;
  for (int k = 0; k < per_side; ++k) {
    const double t = spread * (static_cast<double>(k) / per_side - 0.5);
    const Vec3 x = center + Vec3(t, 0.3 * t, 0.0);
    if (up) out.push_back(slab_sample(x + Vec3(0, 0, 10), true));
    if (down) out.push_back(slab_sample(x - Vec3(0, 0, 10), false));
  }
  return out;
}

/// Two spheres on the mid-plane with one bisector face between them.
struct TwoCells {
  MedialMesh mesh;
  std::vector<PowerCell> cells;
  std::vector<Clusters> clusters;
};

TwoCells two_cells(bool face_up, bool face_down) {
  TwoCells t;
  t.mesh.spheres = {Sphere{Vec3(40, 50, 50), 50.0, SphereClass::T2_sheet, false},
                    Sphere{Vec3(60, 50, 50), 50.0, SphereClass::T2_sheet, false}};
  t.mesh.edges = {MedialEdge{0, 1, true}};
  t.cells.resize(2);
  for (int i = 0; i < 2; ++i) {
    t.cells[i].sphere_id = i;
    t.cells[i].neighbor_ids = {1 - i};
    t.cells[i].samples = slab_samples(t.mesh.spheres[i].center, 10.0, true, true, 8);
    t.clusters.push_back(cluster_samples(t.cells[i].samples, cluster_distance(50.0), {}));
  }
  BisectorFace face;
  face.neighbor = 1;
  face.area = 1.0;
  face.samples = slab_samples(Vec3(50, 50, 50), 10.0, face_up, face_down, 6);
  t.cells[0].faces.push_back(face);
  return t;
}

MedialMesh mesh_from(int n, std::vector<std::array<int, 3>> faces) {
  MedialMesh m;
  m.spheres.resize(n);
  for (int i = 0; i < n; ++i) {
    m.spheres[i].center = Vec3(std::cos(i * 1.3) * 10.0, std::sin(i * 1.7) * 10.0, i * 0.7);
    m.spheres[i].klass = SphereClass::T2_sheet;
  }
  std::set<std::pair<int, int>> edges;
  for (auto& f : faces) {
    std::sort(f.begin(), f.end());
    edges.insert({f[0], f[1]});
    edges.insert({f[0], f[2]});
    edges.insert({f[1], f[2]});
  }
  std::sort(faces.begin(), faces.end());
  faces.erase(std::unique(faces.begin(), faces.end()), faces.end());
  for (const auto& [a, b] : edges) m.edges.push_back({a, b, true});
  for (const auto& f : faces) m.faces.push_back({f, true, -1});
  return m;
}

/// Brute-force 4-clique scan over all quadruples.
int count_pockets_brute(const MedialMesh& m) {
  const int n = static_cast<int>(m.spheres.size());
  auto valid = [&](int a, int b, int c) {
    const int f = m.find_face(a, b, c);
    return f >= 0 && m.faces[f].valid;
  };
  int count = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c)
        for (int d = c + 1; d < n; ++d)
          count += valid(a, b, c) && valid(a, b, d) && valid(a, c, d) && valid(b, c, d);
  return count;
}

}  // namespace

TEST_CASE("class from cluster count") {
  Sphere s;
  CHECK(classify_sphere(0, s) == SphereClass::T1_spike);
  CHECK(classify_sphere(1, s) == SphereClass::T1_spike);
  CHECK(classify_sphere(2, s) == SphereClass::T2_sheet);
  CHECK(classify_sphere(3, s) == SphereClass::T3_seam);
  CHECK(classify_sphere(4, s) == SphereClass::T4_junction);
  CHECK(classify_sphere(6, s) == SphereClass::T4_junction);
  s.pinned = true;
  s.klass = SphereClass::T1_2_feature_edge;
  CHECK(classify_sphere(3, s) == SphereClass::T1_2_feature_edge);
  s.klass = SphereClass::T1_3_corner;
  CHECK(classify_sphere(1, s) == SphereClass::T1_3_corner);
}

TEST_CASE("cube centre cell sees six walls and is a junction") {
  const TetDomain cube = normalize(fixtures::unit_cube()).first;
  const Sphere center{Vec3(500, 500, 500), 500.0, SphereClass::unknown, false};
  std::vector<Sphere> spheres{center};
  for (int k = 0; k < 3; ++k)
    for (double s : {-1.0, 1.0}) {
      Sphere o;
      o.center = center.center;
      o.center[k] += s * 300.0;
      o.radius = 200.0;
      spheres.push_back(o);
    }
  const RpdContext ctx(cube);
  auto cells = compute_rpd(ctx, spheres);
  SamplingOptions so;
  so.samples_per_cell = 256;
  sample_cells(cells, ctx.surface(), so, 3);
  const Clusters c = subvolume_clusters(cells[0], center.radius, cube);
  CHECK(c.size() == 6);
  CHECK(classify_sphere(cells[0], c, center) == SphereClass::T4_junction);
}

TEST_CASE("bisector rule: face spanning both sub-volumes is valid") {
  const TwoCells t = two_cells(true, true);
  const auto rule = edge_rule_validity(t.mesh, t.cells, t.clusters, TetDomain{});
  CHECK(rule[0]);
}

TEST_CASE("bisector rule: face inside one sub-volume while the cells span two is invalid") {
  for (bool up : {true, false}) {
    const TwoCells t = two_cells(up, !up);
    const auto rule = edge_rule_validity(t.mesh, t.cells, t.clusters, TetDomain{});
    CHECK_FALSE(rule[0]);
  }
}

TEST_CASE("bisector rule: one endpoint matching suffices") {
  TwoCells t = two_cells(true, false);
  t.cells[1].samples = slab_samples(t.mesh.spheres[1].center, 10.0, true, false, 8);
  t.clusters[1] = cluster_samples(t.cells[1].samples, cluster_distance(50.0), {});
  CHECK(edge_rule_validity(t.mesh, t.cells, t.clusters, TetDomain{})[0]);
}

TEST_CASE("bisector rule: face samples stored on the other side are found") {
  TwoCells t = two_cells(true, false);
  t.cells[1].faces = t.cells[0].faces;
  t.cells[1].faces[0].neighbor = 0;
  t.cells[0].faces.clear();
  CHECK_FALSE(edge_rule_validity(t.mesh, t.cells, t.clusters, TetDomain{})[0]);
}

TEST_CASE("invalid edges invalidate their faces") {
  TwoCells t = two_cells(true, false);
  t.mesh.spheres.push_back(Sphere{Vec3(50, 70, 50), 50.0, SphereClass::T2_sheet, false});
  t.mesh.edges = {MedialEdge{0, 1, true}, MedialEdge{0, 2, true}, MedialEdge{1, 2, true}};
  t.mesh.faces = {MedialFace{{0, 1, 2}, true, -1}};
  t.cells.push_back(t.cells[1]);
  t.cells[2].sphere_id = 2;
  t.clusters.push_back(t.clusters[1]);
  const MedialMesh pruned = prune_invalid(t.mesh, t.cells, t.clusters, TetDomain{});
  CHECK_FALSE(pruned.edges[0].valid);
  CHECK(pruned.edges[1].valid);
  CHECK(pruned.edges[2].valid);
  CHECK_FALSE(pruned.faces[0].valid);
}

TEST_CASE("collapse removes free invalid edges and keeps the Euler characteristic") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_int_distribution<int> v(0, 9);
    std::vector<std::array<int, 3>> faces;
    for (int k = 0; k < 14; ++k) {
      std::array<int, 3> f{v(rng), v(rng), v(rng)};
      if (f[0] != f[1] && f[1] != f[2] && f[0] != f[2]) faces.push_back(f);
    }
    MedialMesh m = mesh_from(10, faces);
    std::vector<char> rule(m.edges.size());
    std::bernoulli_distribution keep(0.7);
    for (auto& r : rule) r = keep(rng);
    const long chi = euler_characteristic(m);
    const PruneStats st = collapse_invalid(m, rule);
    CHECK(euler_characteristic(m) == chi);
    CHECK(st.edges_removed == st.faces_removed);
    for (std::size_t e = 0; e < m.edges.size(); ++e) {
      if (rule[e]) CHECK(m.edges[e].valid);
      if (!m.edges[e].valid) continue;
      if (rule[e]) continue;
      int live = 0;
      for (const auto& f : m.faces)
        if (f.valid && std::count(f.v.begin(), f.v.end(), m.edges[e].a) && std::count(f.v.begin(), f.v.end(), m.edges[e].b))
          ++live;
      CHECK(live != 1);
    }
  }
}

TEST_CASE("a lone tetrahedral pocket loses exactly one face") {
  MedialMesh m = mesh_from(4, {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}});
  CHECK(find_pockets(m).size() == 1);
  const ThinStats st = enforce_thinness(m);
  CHECK(st.pockets == 1);
  CHECK(st.faces_removed == 1);
  CHECK(m.valid_face_count() == 3);
  CHECK(find_pockets(m).empty());
  CHECK(euler_characteristic(m) == 1);
}

TEST_CASE("thinning removes the worst-shaped face of a pocket") {
  MedialMesh m = mesh_from(4, {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}});
  m.spheres[0].center = Vec3(0, 0, 0);
  m.spheres[1].center = Vec3(10, 0, 0);
  m.spheres[2].center = Vec3(0, 10, 0);
  m.spheres[3].center = Vec3(0.5, 0.5, 0.2);
  double worst = 2.0;
  int worst_face = -1;
  for (int f = 0; f < 4; ++f) {
    const auto& v = m.faces[f].v;
    const double q = triangle_quality(m.spheres[v[0]].center, m.spheres[v[1]].center, m.spheres[v[2]].center);
    if (q < worst) {
      worst = q;
      worst_face = f;
    }
  }
  enforce_thinness(m);
  CHECK_FALSE(m.faces[worst_face].valid);
}

TEST_CASE("mesh without pockets is unchanged by thinning") {
  MedialMesh m = mesh_from(5, {{0, 1, 2}, {1, 2, 3}, {2, 3, 4}});
  const ThinStats st = enforce_thinness(m);
  CHECK(st.pockets == 0);
  CHECK(m.valid_face_count() == 3);
}

TEST_CASE("thinning leaves no 4-clique on random small meshes") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    std::uniform_int_distribution<int> v(0, 6);
    std::vector<std::array<int, 3>> faces;
    for (int k = 0; k < 25; ++k) {
      std::array<int, 3> f{v(rng), v(rng), v(rng)};
      if (f[0] != f[1] && f[1] != f[2] && f[0] != f[2]) faces.push_back(f);
    }
    MedialMesh m = mesh_from(7, faces);
    const int before = count_pockets_brute(m);
    CHECK(static_cast<int>(find_pockets(m).size()) == before);
    enforce_thinness(m);
    CHECK(count_pockets_brute(m) == 0);
  }
}

TEST_CASE("structure: one sheet and no seams on a plain strip") {
  MedialMesh m = mesh_from(6, {{0, 1, 2}, {1, 2, 3}, {2, 3, 4}, {3, 4, 5}});
  m = extract_structure(m);
  for (const auto& f : m.faces) CHECK(f.sheet == 0);
  CHECK(m.seams.empty());
  CHECK(m.junctions.empty());
}

TEST_CASE("structure: three fins on a seam line, split by a junction") {
  // Seam spheres 0..3 along x; fin k uses spheres 4 + 4k .. 7 + 4k.
  std::vector<std::array<int, 3>> faces;
  for (int fin = 0; fin < 3; ++fin)
    for (int i = 0; i < 3; ++i) {
      const int a = i, b = i + 1, c = 4 + 4 * fin + i, d = 4 + 4 * fin + i + 1;
      faces.push_back({a, b, c});
      faces.push_back({b, c, d});
    }
  MedialMesh m = mesh_from(16, faces);
  for (int i = 0; i < 4; ++i) m.spheres[i].klass = SphereClass::T3_seam;
  MedialMesh s = extract_structure(m);
  std::set<int> sheets;
  for (const auto& f : s.faces) {
    CHECK(f.sheet >= 0);
    sheets.insert(f.sheet);
  }
  CHECK(sheets.size() == 3);
  REQUIRE(s.seams.size() == 1);
  CHECK(s.seams[0] == std::vector<int>{0, 1, 2, 3});
  CHECK(s.junctions.empty());

  m.spheres[2].klass = SphereClass::T4_junction;
  s = extract_structure(m);
  CHECK(s.seams.size() == 2);
  CHECK(s.junctions == std::vector<int>{2});
}

TEST_CASE("structure: closed seam loop forms one chain") {
  MedialMesh m = mesh_from(4, {{0, 1, 2}, {0, 2, 3}});
  for (auto& s : m.spheres) s.klass = SphereClass::T3_seam;
  m.faces.clear();
  m.edges = {{0, 1, true}, {0, 3, true}, {1, 2, true}, {2, 3, true}};
  const MedialMesh s = extract_structure(m);
  REQUIRE(s.seams.size() == 1);
  CHECK(s.seams[0].size() == 5);
  CHECK(s.seams[0].front() == s.seams[0].back());
}
