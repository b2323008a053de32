#include <cstdio>
#include <filesystem>
#include <iostream>

#include "medial/fixtures.hpp"
#include "medial/report.hpp"

using namespace medial;

namespace {

/// Mid-plane sheet of a 10 x 10 x 1 slab: an n x n grid of spheres of radius 1/2.
MedialMesh slab_sheet(int n) {
  MedialMesh m;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double x = 0.5 + 9.0 * i / (n - 1), y = 0.5 + 9.0 * j / (n - 1);
      m.spheres.push_back(Sphere{Vec3(x, y, 0.5), 0.5});
    }
  const auto id = [n](int i, int j) { return j * n + i; };
  const auto edge = [&](int a, int b) { m.edges.push_back({std::min(a, b), std::max(a, b), true}); };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (i + 1 < n) edge(id(i, j), id(i + 1, j));
      if (j + 1 < n) edge(id(i, j), id(i, j + 1));
      if (i + 1 < n && j + 1 < n) {
        edge(id(i, j), id(i + 1, j + 1));
        m.faces.push_back({{id(i, j), id(i + 1, j), id(i + 1, j + 1)}, true, -1});
        m.faces.push_back({{id(i, j), id(i, j + 1), id(i + 1, j + 1)}, true, -1});
      }
    }
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : ".";
  try {
    std::filesystem::create_directories(dir);
    write_medit(fixtures::unit_cube(), dir / "cube.mesh");
    write_medit(fixtures::box(Vec3(4, 1, 1), {4, 1, 1}), dir / "box411.mesh");
    write_medit(fixtures::box(Vec3(10, 10, 1), {4, 4, 1}), dir / "slab.mesh");
    write_medit(fixtures::l_shape(2.0, 1.0, 2, 1), dir / "lshape.mesh");
    write_medit(fixtures::ball(1.0, 12), dir / "ball.mesh");
    write_medit(fixtures::torus(2.0, 0.6, 24, 8), dir / "torus.mesh");
    write_ma(slab_sheet(10), AffineTransform{}, dir / "slab.ma");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
