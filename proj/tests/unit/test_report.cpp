#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "medial/fixtures.hpp"
#include "medial/report.hpp"

using namespace medial;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "medial_test_report";
  fs::create_directories(dir);
  return dir / name;
}

MedialMesh two_faces() {
  MedialMesh m;
  m.spheres = {Sphere{Vec3(0.1, 0.2, 0.3), 0.25}, Sphere{Vec3(1, 0, 0), 0.5}, Sphere{Vec3(0, 1, 0), 1.0 / 3.0},
               Sphere{Vec3(1, 1, 0), 0.0}};
  m.edges = {{0, 1, true}, {0, 2, true}, {1, 2, true}, {1, 3, false}, {2, 3, true}};
  m.faces = {{{0, 1, 2}, true, 0}, {{1, 2, 3}, false, -1}};
  return m;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("ma text layout") {
  const auto text = format_ma(two_faces(), AffineTransform{});
  CHECK(text ==
        "4 4 1\n"
        "v 0.10000000000000001 0.20000000000000001 0.29999999999999999 0.25\n"
        "v 1 0 0 0.5\n"
        "v 0 1 0 0.33333333333333331\n"
        "v 1 1 0 0\n"
        "e 0 1\ne 0 2\ne 1 2\ne 2 3\n"
        "f 0 1 2\n");
}

TEST_CASE("ma round trip through a transform") {
  AffineTransform tf;
  tf.scale = 250.0;
  tf.offset = Vec3(-3.0, 1.5, 7.25);
  MedialMesh m = two_faces();
  for (auto& s : m.spheres) {
    s.center *= 1000.0;
    s.radius *= 1000.0;
  }
  const auto path = temp_file("round.ma");
  write_ma(m, tf, path);
  const MedialMesh back = read_ma(path, tf);
  REQUIRE(back.spheres.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK((back.spheres[i].center - m.spheres[i].center).norm() < 1e-9);
    CHECK(back.spheres[i].radius == doctest::Approx(m.spheres[i].radius));
  }
  CHECK(back.edges.size() == 4);
  CHECK(back.faces.size() == 1);
  CHECK(back.faces[0].v == std::array<int, 3>{0, 1, 2});
  CHECK(format_ma(back, tf) == format_ma(read_ma(path, tf), tf));
}

TEST_CASE("ma reader errors") {
  CHECK_THROWS_AS(read_ma(temp_file("missing.ma"), AffineTransform{}), MeshError);
  const auto bad = temp_file("bad.ma");
  write(bad, "2 1 0\nv 0 0 0 1\nv 1 0 0 1\ne 0 2\n");
  try {
    read_ma(bad, AffineTransform{});
    FAIL("expected a parse error");
  } catch (const MeshError& e) {
    CHECK(e.kind() == MeshErrorKind::Parse);
  }
  write(bad, "1 0 0\nx 0 0 0 1\n");
  CHECK_THROWS_AS(read_ma(bad, AffineTransform{}), MeshError);
}

TEST_CASE("evaluate classifies the slab mid-plane sheet") {
  const TetDomain raw = fixtures::box(Vec3(10, 10, 1), {4, 4, 1});
  auto [domain, tf] = normalize(raw);
  domain = detect_features(std::move(domain), kDefaultFeatureAngle);
  MedialMesh m;
  const int n = 8;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      m.spheres.push_back(Sphere{tf.to_normalized(Vec3(2.0 + 6.0 * i / (n - 1), 2.0 + 6.0 * j / (n - 1), 0.5)),
                                 tf.length_to_normalized(0.5)});
  for (int j = 0; j + 1 < n; ++j)
    for (int i = 0; i + 1 < n; ++i) {
      const int a = j * n + i;
      // Diagonals through the corner spheres, so no edge links two border spheres across a corner.
      if (i + j == n - 2) {
        m.faces.push_back({{a, a + 1, a + n}, true, -1});
        m.faces.push_back({{a + 1, a + n, a + n + 1}, true, -1});
      } else {
        m.faces.push_back({{a, a + 1, a + n + 1}, true, -1});
        m.faces.push_back({{a, a + n, a + n + 1}, true, -1});
      }
    }
  std::set<std::pair<int, int>> edges;
  for (const auto& f : m.faces)
    for (int k = 0; k < 3; ++k) edges.insert({std::min(f.v[k], f.v[(k + 1) % 3]), std::max(f.v[k], f.v[(k + 1) % 3])});
  for (const auto& [a, b] : edges) m.edges.push_back({a, b, true});
  EvaluateOptions opt;
  opt.hausdorff_samples = 2000;
  const auto ev = evaluate_mesh(m, domain, opt);
  // Border cells reach the side walls.
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const auto k = ev.mesh.spheres[j * n + i].klass;
      const int border = (i == 0 || i == n - 1) + (j == 0 || j == n - 1);
      CHECK(k == (border == 0 ? SphereClass::T2_sheet : border == 1 ? SphereClass::T3_seam : SphereClass::T4_junction));
    }
  CHECK(ev.metrics.topology.ter == 0);
  CHECK(ev.metrics.sheets == 1);
  CHECK(ev.metrics.seams == 4);
  CHECK(ev.metrics.junctions == 4);

  const auto j = to_json(ev.metrics);
  for (const char* key : {"mser", "tq_avg", "tq_p85", "tq_p90", "ter", "hd_pct", "counts"}) CHECK(j.contains(key));
  CHECK(j["counts"]["spheres"] == 64);
}

TEST_CASE("structure exports") {
  MedialMesh m = two_faces();
  m.spheres[0].klass = SphereClass::T4_junction;
  m.seams = {{0, 1, 2}};
  m.junctions = {0};
  const auto ply = temp_file("s.ply"), seams = temp_file("s.obj"), junctions = temp_file("j.obj");
  write_sheets_ply(m, AffineTransform{}, ply);
  write_seams_obj(m, AffineTransform{}, seams);
  write_junctions_obj(m, AffineTransform{}, junctions);
  std::ifstream in(seams);
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text.find("l 1 2 3\n") != std::string::npos);
  std::ifstream pin(ply);
  const std::string ptext((std::istreambuf_iterator<char>(pin)), {});
  CHECK(ptext.find("element face 1\n") != std::string::npos);
  CHECK(ptext.find("element vertex 4\n") != std::string::npos);
  CHECK(fs::file_size(junctions) > 0);
}

TEST_CASE("config snapshot carries the defaults") {
  const auto j = to_json(PipelineConfig{});
  CHECK(j["gamma"] == 40.0);
  CHECK(j["c_sigma"] == 0.3);
  CHECK(j["knn"] == 10);
  CHECK(j["max_outer"] == 30);
  CHECK(j["grad_tol"] == 5e-3);
  CHECK(j["outer_tol"] == 3e-4);
}
