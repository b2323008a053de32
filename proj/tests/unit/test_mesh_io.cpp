#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "medial/fixtures.hpp"
#include "medial/mesh_io.hpp"

using namespace medial;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "medial_test_mesh_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::filesystem::path write_text(const std::string& name, const std::string& text) {
  const auto path = temp_file(name);
  std::ofstream(path) << text;
  return path;
}

int count_kind(const TetDomain& d, Sharpness kind) {
  int n = 0;
  for (const auto& f : d.feature_edges) n += f.kind == kind;
  return n;
}

}  // namespace

TEST_CASE("cube fixture has the expected boundary and features") {
  const TetDomain d = fixtures::unit_cube();
  CHECK(d.vertices.size() == 8);
  CHECK(d.tets.size() == 6);
  CHECK(d.boundary_tris.size() == 12);
  CHECK(d.boundary_edges.size() == 18);
  CHECK(count_kind(d, Sharpness::ConvexSharp) == 12);
  CHECK(count_kind(d, Sharpness::ConcaveSharp) == 0);
  CHECK(d.feature_corners.size() == 8);
  CHECK(d.feature_polylines.size() == 12);
  CHECK(boundary_euler_characteristic(d) == 2);
  CHECK(domain_volume(d) == doctest::Approx(1.0));
  CHECK(enclosed_volume(d) == doctest::Approx(1.0));
  CHECK(boundary_area(d) == doctest::Approx(6.0));
  int patches = 0;
  for (int p : d.tri_patch) patches = std::max(patches, p + 1);
  CHECK(patches == 6);
}

TEST_CASE("boundary triangles face outward") {
  const TetDomain d = fixtures::box(Vec3(2, 1, 1), {4, 2, 2});
  const Vec3 center = 0.5 * (d.bbox_min + d.bbox_max);
  for (int t = 0; t < static_cast<int>(d.boundary_tris.size()); ++t) {
    const Vec3 c = (d.vertices[d.boundary_tris[t][0]] + d.vertices[d.boundary_tris[t][1]] +
                    d.vertices[d.boundary_tris[t][2]]) / 3.0;
    CHECK(triangle_normal(d, t).dot(c - center) > 0.0);
  }
}

TEST_CASE("flat edges are not features; face diagonals lie inside patches") {
  const TetDomain d = fixtures::box(Vec3(4, 1, 1), {8, 2, 2});
  CHECK(count_kind(d, Sharpness::ConvexSharp) == 4 * 8 + 8 * 2);
  CHECK(d.feature_corners.size() == 8);
  CHECK(d.feature_polylines.size() == 12);
}

TEST_CASE("L-shape has one concave edge chain") {
  const TetDomain d = fixtures::l_shape(2.0, 1.0, 4, 3);
  CHECK(count_kind(d, Sharpness::ConcaveSharp) == 3);
  for (const auto& f : d.feature_edges) {
    if (f.kind != Sharpness::ConcaveSharp) continue;
    const auto& e = d.boundary_edges[f.edge];
    CHECK(d.vertices[e[0]].x() == doctest::Approx(1.0));
    CHECK(d.vertices[e[0]].y() == doctest::Approx(1.0));
    CHECK(interior_dihedral(d, f.edge) == doctest::Approx(1.5 * std::numbers::pi));
  }
}

TEST_CASE("smooth fixtures have no sharp features") {
  const TetDomain ball = fixtures::ball(1.0, 8);
  CHECK(ball.feature_edges.empty());
  CHECK(boundary_euler_characteristic(ball) == 2);
  const TetDomain torus = fixtures::torus(350.0, 150.0, 48, 6);
  CHECK(torus.feature_edges.empty());
  CHECK(boundary_euler_characteristic(torus) == 0);
}

TEST_CASE("phi = 0 disables automatic detection; manual edges become convex-sharp") {
  const TetDomain base = fixtures::unit_cube();
  CHECK(detect_features(base, 0.0).feature_edges.empty());
  const auto e = base.boundary_edges[0];
  const TetDomain manual = detect_features(base, 0.0, {{e[0], e[1]}});
  REQUIRE(manual.feature_edges.size() == 1);
  CHECK(manual.feature_edges[0].kind == Sharpness::ConvexSharp);
  CHECK(manual.feature_corners.size() == 2);
  CHECK_THROWS_AS(detect_features(base, 0.0, {{0, 0}}), MeshError);
}

TEST_CASE("normalize maps the longest extent to 1000") {
  TetDomain d = fixtures::box(Vec3(2, 1, 1), {2, 1, 1});
  for (auto& v : d.vertices) v += Vec3(5, 5, 5);
  d = build_domain(d.vertices, d.tets);
  const auto [n, xf] = normalize(d);
  CHECK(xf.scale == doctest::Approx(500.0));
  CHECK((n.bbox_min - Vec3::Zero()).norm() == doctest::Approx(0.0));
  CHECK((n.bbox_max - Vec3(1000, 500, 500)).norm() == doctest::Approx(0.0).epsilon(1e-9));
  for (std::size_t i = 0; i < d.vertices.size(); ++i)
    CHECK((xf.to_input(n.vertices[i]) - d.vertices[i]).norm() < 1e-12);
  CHECK(xf.length_to_input(xf.length_to_normalized(3.5)) == doctest::Approx(3.5));
}

TEST_CASE("degenerate bounding box is rejected") {
  TetDomain d = fixtures::unit_cube();
  for (auto& v : d.vertices) v.setZero();
  d.bbox_min.setZero();
  d.bbox_max.setZero();
  try {
    (void)normalize(d);
    FAIL("expected MeshError");
  } catch (const MeshError& e) {
    CHECK(e.kind() == MeshErrorKind::DegenerateBBox);
  }
}

TEST_CASE("MEDIT round trip") {
  const TetDomain d = fixtures::box(Vec3(3, 1, 2), {3, 1, 2});
  const auto path = temp_file("roundtrip.mesh");
  write_medit(d, path);
  const TetDomain r = load_tet_mesh(path);
  CHECK(r.vertices.size() == d.vertices.size());
  CHECK(r.tets.size() == d.tets.size());
  CHECK(r.boundary_tris.size() == d.boundary_tris.size());
  CHECK(domain_volume(r) == doctest::Approx(6.0));
}

TEST_CASE("MEDIT out-of-range index names the element") {
  const auto path = write_text("bad_index.mesh",
                               "MeshVersionFormatted 1\nDimension 3\nVertices\n4\n"
                               "0 0 0 0\n1 0 0 0\n0 1 0 0\n0 0 1 0\n"
                               "Tetrahedra\n1\n1 2 3 9 0\nEnd\n");
  try {
    (void)load_tet_mesh(path);
    FAIL("expected MeshError");
  } catch (const MeshError& e) {
    CHECK(e.kind() == MeshErrorKind::IndexOutOfRange);
    CHECK(std::string(e.what()).find("tetrahedron 0") != std::string::npos);
    CHECK(std::string(e.what()).find("vertex 8") != std::string::npos);
  }
}

TEST_CASE("MEDIT unknown keyword is a parse error") {
  const auto path = write_text("bad_kw.mesh", "MeshVersionFormatted 1\nDimension 3\nBogus 3\nEnd\n");
  try {
    (void)load_tet_mesh(path);
    FAIL("expected MeshError");
  } catch (const MeshError& e) {
    CHECK(e.kind() == MeshErrorKind::Parse);
  }
}

TEST_CASE("missing file is an IO error") {
  try {
    (void)load_tet_mesh(temp_file("does_not_exist.mesh"));
    FAIL("expected MeshError");
  } catch (const MeshError& e) {
    CHECK(e.kind() == MeshErrorKind::Io);
  }
}

TEST_CASE("legacy VTK tetrahedra load") {
  const auto path = write_text("tet.vtk",
                               "# vtk DataFile Version 3.0\nsingle tet\nASCII\nDATASET UNSTRUCTURED_GRID\n"
                               "POINTS 4 double\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n"
                               "CELLS 1 5\n4 0 1 2 3\nCELL_TYPES 1\n10\n");
  const TetDomain d = load_tet_mesh(path);
  CHECK(d.tets.size() == 1);
  CHECK(d.boundary_tris.size() == 4);
  CHECK(domain_volume(d) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("validation errors") {
  const std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
                               {5, 5, 5}, {6, 5, 5}, {5, 6, 5}, {5, 5, 6}, {-1, -1, -1}};
  auto kind_of = [&](std::vector<std::array<int, 4>> tets) {
    try {
      (void)build_domain(v, std::move(tets));
    } catch (const MeshError& e) {
      return e.kind();
    }
    return MeshErrorKind::Io;
  };
  CHECK(kind_of({{0, 2, 1, 3}}) == MeshErrorKind::InvertedTet);
  CHECK(kind_of({{0, 1, 2, 3}, {4, 5, 6, 7}}) == MeshErrorKind::MultipleComponents);
  // Three tets sharing face (0, 1, 2).
  const std::vector<Vec3> w = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 0, -1}, {0.2, 0.2, 2}};
  try {
    (void)build_domain(w, {{0, 1, 2, 3}, {0, 2, 1, 4}, {0, 1, 2, 5}});
    FAIL("expected MeshError");
  } catch (const MeshError& e) {
    CHECK(e.kind() == MeshErrorKind::NonManifold);
  }
}

TEST_CASE("supplied triangles must match the boundary") {
  const std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  // Inward-oriented input is reoriented outward.
  const TetDomain d = build_domain(v, {{0, 1, 2, 3}}, std::vector<std::array<int, 3>>{
                                                          {0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}});
  for (int t = 0; t < 4; ++t) {
    const auto& f = d.boundary_tris[t];
    const Vec3 c = (v[f[0]] + v[f[1]] + v[f[2]]) / 3.0;
    CHECK(triangle_normal(d, t).dot(c - Vec3(0.25, 0.25, 0.25)) > 0);
  }
  CHECK_THROWS_AS(build_domain(v, {{0, 1, 2, 3}}, std::vector<std::array<int, 3>>{{0, 1, 2}}),
                  MeshError);
}

TEST_CASE("feature sidecar parsing") {
  const auto path = write_text("features.txt", "# manual edges\n0 1\n\n2 3 # trailing\n");
  const auto edges = load_feature_sidecar(path);
  REQUIRE(edges.size() == 2);
  CHECK(edges[1] == std::array<int, 2>{2, 3});
  CHECK_THROWS_AS(load_feature_sidecar(write_text("bad.txt", "4\n")), MeshError);
}
