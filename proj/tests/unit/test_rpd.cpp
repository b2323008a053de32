#include <fstream>
#include <optional>
#include <random>

#include "doctest.h"
#include "medial/fixtures.hpp"
#include "medial/rpd.hpp"

using namespace medial;

namespace {

TetDomain normalized(const TetDomain& d) { return normalize(d).first; }

double total_volume(const std::vector<PowerCell>& cells) {
  double v = 0.0;
  for (const auto& c : cells) v += c.volume;
  return v;
}

int argmin_power(const std::vector<Sphere>& spheres, const Vec3& x) {
  int best = 0;
  for (int j = 1; j < static_cast<int>(spheres.size()); ++j)
    if (power_distance(spheres[j], x) < power_distance(spheres[best], x)) best = j;
  return best;
}

std::vector<Sphere> random_spheres(const TetDomain& d, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Sphere> out;
  for (int i = 0; i < n; ++i) {
    const Vec3 c = d.bbox_min + Vec3(u(rng), u(rng), u(rng)).cwiseProduct(d.bbox_max - d.bbox_min);
    out.push_back({c, 200.0 * u(rng)});
  }
  return out;
}

}  // namespace

TEST_CASE("power bisector separates by power distance") {
  const Sphere a{Vec3(0, 0, 0), 3.0}, b{Vec3(10, 1, -2), 1.0};
  const Plane p = power_bisector(a, b, 1);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 x(u(rng), u(rng), u(rng));
    const double diff = power_distance(a, x) - power_distance(b, x);
    CHECK((p.signed_distance(x) <= 0) == (diff <= 0));
  }
  CHECK(p.tag.id == 1);
}

TEST_CASE("single sphere owns the whole domain") {
  const TetDomain cube = normalized(fixtures::unit_cube());
  const std::vector<Sphere> s = {{Vec3(500, 500, 500), 500.0}};
  const auto cells = compute_rpd(cube, s);
  CHECK(cells[0].volume == doctest::Approx(1e9).epsilon(1e-9));
  CHECK(cells[0].touches_boundary);
  CHECK(cells[0].neighbor_ids.empty());
}

TEST_CASE("two symmetric spheres split the box at the mid-plane") {
  const TetDomain box = normalized(fixtures::box(Vec3(2, 1, 1), {4, 2, 2}));
  const std::vector<Sphere> s = {{Vec3(300, 250, 250), 100.0}, {Vec3(700, 250, 250), 100.0}};
  const auto cells = compute_rpd(box, s);
  CHECK(cells[0].volume == doctest::Approx(cells[1].volume).epsilon(1e-6));
  for (const auto& piece : cells[0].pieces)
    for (const Vec3& v : piece.vertices()) CHECK(v.x() <= 500.0 + 1e-6);
  const MedialMesh mesh = dual_medial_mesh(cells, s, box.eps());
  CHECK(mesh.edges.size() == 1);
  CHECK(mesh.faces.empty());
}

TEST_CASE("random configurations partition the cube and match the argmin oracle") {
  const TetDomain cube = normalized(fixtures::unit_cube());
  const RpdContext ctx(cube);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto spheres = random_spheres(cube, 20, seed);
    const auto cells = compute_rpd(ctx, spheres);
    CHECK(total_volume(cells) == doctest::Approx(1e9).epsilon(1e-6));

    std::mt19937_64 rng(seed + 100);
    std::uniform_real_distribution<double> u(0.0, 1000.0);
    int mismatches = 0;
    for (int k = 0; k < 10000; ++k) {
      const Vec3 x(u(rng), u(rng), u(rng));
      const int owner = argmin_power(spheres, x);
      if (!cells[owner].contains(x, 1e-6)) ++mismatches;
    }
    CHECK(mismatches == 0);

    // Neighbour symmetry.
    for (const auto& c : cells)
      for (int j : c.neighbor_ids) {
        const auto& other = cells[j].neighbor_ids;
        CHECK(std::binary_search(other.begin(), other.end(), c.sphere_id));
      }
  }
}

TEST_CASE("adding a sphere never enlarges existing cells") {
  const TetDomain cube = normalized(fixtures::unit_cube());
  auto spheres = random_spheres(cube, 15, 9);
  const auto before = compute_rpd(cube, spheres);
  spheres.push_back({Vec3(400, 600, 500), 150.0});
  const auto after = compute_rpd(cube, spheres);
  for (int i = 0; i < 15; ++i) CHECK(after[i].volume <= before[i].volume + 1e-6 * 1e9);
}

TEST_CASE("exact duplicates keep the lowest index") {
  const TetDomain cube = normalized(fixtures::unit_cube());
  const std::vector<Sphere> s = {{Vec3(300, 300, 300), 50.0}, {Vec3(700, 700, 700), 50.0}, {Vec3(300, 300, 300), 50.0}};
  const auto cells = compute_rpd(cube, s);
  CHECK(!cells[0].empty());
  CHECK(cells[2].empty());
  CHECK(total_volume(cells) == doctest::Approx(1e9).epsilon(1e-9));
}

TEST_CASE("three spheres around a common power edge give one face") {
  const TetDomain slab = normalized(fixtures::box(Vec3(10, 10, 1), {4, 4, 1}));
  const Vec3 c(500, 500, 50);
  std::vector<Sphere> s;
  for (int k = 0; k < 3; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 3.0;
    s.push_back({c + 200.0 * Vec3(std::cos(a), std::sin(a), 0.0), 50.0});
  }
  const auto cells = compute_rpd(slab, s);
  const MedialMesh mesh = dual_medial_mesh(cells, s, slab.eps());
  CHECK(mesh.edges.size() == 3);
  REQUIRE(mesh.faces.size() == 1);
  CHECK(mesh.faces[0].v == std::array<int, 3>{0, 1, 2});
  CHECK(mesh.cells.empty());
  // Brute-force shared-face scan: every pair of cells touches along the vertical power edge.
  for (const auto& cell : cells) {
    REQUIRE(cell.power_edges.size() == 1);
    CHECK(cell.power_edges[0].length == doctest::Approx(100.0).epsilon(1e-9));
  }
}

TEST_CASE("collinear spheres in a tube form a chain") {
  const TetDomain tube = normalized(fixtures::box(Vec3(10, 1, 1), {10, 1, 1}));
  std::vector<Sphere> s;
  for (int k = 0; k < 4; ++k) s.push_back({Vec3(125 + 250 * k, 50, 50), 50.0});
  const MedialMesh mesh = dual_medial_mesh(compute_rpd(tube, s), s, tube.eps());
  CHECK(mesh.edges.size() == 3);
  CHECK(mesh.faces.empty());
  for (int k = 0; k < 3; ++k) CHECK(mesh.find_edge(k, k + 1) >= 0);
}

TEST_CASE("four spheres around an interior power vertex give a closed pocket") {
  const TetDomain cube = normalized(fixtures::unit_cube());
  const std::vector<Sphere> s = {{Vec3(600, 600, 600), 10.0},
                                 {Vec3(600, 400, 400), 10.0},
                                 {Vec3(400, 600, 400), 10.0},
                                 {Vec3(400, 400, 600), 10.0}};
  const MedialMesh mesh = dual_medial_mesh(compute_rpd(cube, s), s, cube.eps());
  CHECK(mesh.edges.size() == 6);
  CHECK(mesh.faces.size() == 4);
  REQUIRE(mesh.cells.size() == 1);
  CHECK(mesh.cells[0] == std::array<int, 4>{0, 1, 2, 3});
}

namespace {

/// A sphere at `center` fenced in by equal-radius neighbours at +-spacing in x and y,
/// plus an optional neighbour above.
std::vector<Sphere> fenced(const Vec3& center, double spacing, std::optional<Vec3> above) {
  std::vector<Sphere> s = {{center, 0.0}};
  for (int sx : {-1, 1}) {
    s.push_back({center + Vec3(sx * spacing, 0, 0), 0.0});
    s.push_back({center + Vec3(0, sx * spacing, 0), 0.0});
  }
  if (above) s.push_back({*above, 0.0});
  return s;
}

}  // namespace

TEST_CASE("thin cell near a wall: all directions point at the wall") {
  const TetDomain cube = normalized(fixtures::unit_cube());
  const auto s = fenced(Vec3(500, 500, 10), 200.0, Vec3(500, 500, 30));
  const RpdContext ctx(cube);
  auto cells = compute_rpd(ctx, s);
  sample_cell(cells[0], ctx.surface(), {}, 1);
  REQUIRE(cells[0].samples.size() >= 32);
  for (const auto& a : cells[0].samples) {
    CHECK(a.n.dot(Vec3(0, 0, -1)) > std::cos(10.0 * std::numbers::pi / 180.0));
    CHECK(cells[0].contains(a.x, 1e-6));
  }
  CHECK(subvolume_clusters(cells[0], 10.0, cube).size() == 1);
}

TEST_CASE("cell straddling a slab mid-plane gives two opposite clusters") {
  const TetDomain slab = normalized(fixtures::box(Vec3(10, 10, 1), {4, 4, 1}));
  const auto s = fenced(Vec3(500, 500, 50), 100.0, std::nullopt);
  const RpdContext ctx(slab);
  auto cells = compute_rpd(ctx, s);
  sample_cell(cells[0], ctx.surface(), {}, 2);
  const Clusters clusters = subvolume_clusters(cells[0], 50.0, slab);
  REQUIRE(clusters.size() == 2);
  const Vec3 n0 = cells[0].samples[clusters[0][0]].n;
  const Vec3 n1 = cells[0].samples[clusters[1][0]].n;
  CHECK(n0.dot(n1) == doctest::Approx(-1.0));
  CHECK(clusters[0].size() >= clusters[1].size());
}

TEST_CASE("cell at a three-wall seam of the 4:1:1 box gives three clusters") {
  const TetDomain box = normalized(fixtures::box(Vec3(4, 1, 1), {8, 2, 2}));
  std::vector<Sphere> s = {{Vec3(62.5, 62.5, 62.5), 62.5}};
  for (int axis = 0; axis < 3; ++axis)
    for (int sgn : {-1, 1}) {
      Vec3 c = s[0].center;
      c[axis] += sgn * 50.0;
      s.push_back({c, 62.5});
    }
  const RpdContext ctx(box);
  auto cells = compute_rpd(ctx, s);
  sample_cell(cells[0], ctx.surface(), {}, 3);
  CHECK(subvolume_clusters(cells[0], 62.5, box).size() == 3);
}

TEST_CASE("sampling is deterministic and face samples lie on the bisector") {
  const TetDomain cube = normalized(fixtures::unit_cube());
  const auto spheres = random_spheres(cube, 12, 4);
  const RpdContext ctx(cube);
  auto a = compute_rpd(ctx, spheres);
  auto b = compute_rpd(ctx, spheres);
  sample_cells(a, ctx.surface(), {}, 77);
  sample_cells(b, ctx.surface(), {}, 77);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].samples.size() == b[i].samples.size());
    for (std::size_t k = 0; k < a[i].samples.size(); ++k) CHECK(a[i].samples[k].x == b[i].samples[k].x);
    for (const auto& f : a[i].faces)
      for (const auto& smp : f.samples)
        CHECK(std::abs(power_distance(spheres[i], smp.x) - power_distance(spheres[f.neighbor], smp.x)) < 1e-3);
  }
}

TEST_CASE("cells dump as a polygon soup") {
  const TetDomain cube = normalized(fixtures::unit_cube());
  const auto spheres = random_spheres(cube, 5, 8);
  const auto cells = compute_rpd(cube, spheres);
  const auto path = std::filesystem::temp_directory_path() / "medial_cells.ply";
  write_cells_ply(cells, path);
  std::ifstream in(path);
  std::string first;
  in >> first;
  CHECK(first == "ply");
}
