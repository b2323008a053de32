#include "medial/fixtures.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace medial::fixtures {

namespace {

// Six Kuhn tetrahedra of a cell: monotone paths from corner 000 to 111.
constexpr int kKuhnPaths[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};

double signed_volume(const std::vector<Vec3>& v, const std::array<int, 4>& t) {
  return (v[t[1]] - v[t[0]]).dot((v[t[2]] - v[t[0]]).cross(v[t[3]] - v[t[0]])) / 6.0;
}

/// Grid of cells with lattice corners (i, j, k); `wrap_i` identifies i = ni with i = 0.
struct LatticeMesh {
  std::vector<std::array<int, 3>> lattice;
  std::vector<std::array<int, 4>> tets;
};

LatticeMesh kuhn_lattice(const std::array<int, 3>& cells, bool wrap_i,
                         const std::function<bool(int, int, int)>& keep) {
  LatticeMesh out;
  std::map<std::array<int, 3>, int> index;
  auto vertex = [&](std::array<int, 3> c) {
    if (wrap_i && c[0] == cells[0]) c[0] = 0;
    auto [it, inserted] = index.try_emplace(c, static_cast<int>(out.lattice.size()));
    if (inserted) out.lattice.push_back(c);
    return it->second;
  };
  for (int i = 0; i < cells[0]; ++i)
    for (int j = 0; j < cells[1]; ++j)
      for (int k = 0; k < cells[2]; ++k) {
        if (keep && !keep(i, j, k)) continue;
        for (const auto& path : kKuhnPaths) {
          std::array<int, 3> c{i, j, k};
          std::array<int, 4> t{};
          t[0] = vertex(c);
          for (int s = 0; s < 3; ++s) {
            ++c[path[s]];
            t[s + 1] = vertex(c);
          }
          out.tets.push_back(t);
        }
      }
  return out;
}

TetDomain finish(std::vector<Vec3> verts, std::vector<std::array<int, 4>> tets) {
  for (auto& t : tets)
    if (signed_volume(verts, t) < 0) std::swap(t[2], t[3]);
  return detect_features(build_domain(std::move(verts), std::move(tets)), kDefaultFeatureAngle);
}

/// Maps the cube [-1, 1]^d onto the ball of the same dimension by radial scaling.
template <int D>
Eigen::Matrix<double, D, 1> cube_to_ball(const Eigen::Matrix<double, D, 1>& p) {
  const double n2 = p.norm();
  if (n2 == 0.0) return p;
  return p * (p.cwiseAbs().maxCoeff() / n2);
}

}  // namespace

TetDomain grid_domain(const Vec3& lo, const Vec3& hi, const std::array<int, 3>& cells,
                      const std::function<bool(int, int, int)>& keep) {
  LatticeMesh lm = kuhn_lattice(cells, false, keep);
  std::vector<Vec3> verts;
  verts.reserve(lm.lattice.size());
  for (const auto& c : lm.lattice) {
    Vec3 p;
    for (int a = 0; a < 3; ++a) p[a] = lo[a] + (hi[a] - lo[a]) * c[a] / cells[a];
    verts.push_back(p);
  }
  return finish(std::move(verts), std::move(lm.tets));
}

TetDomain unit_cube() { return grid_domain(Vec3::Zero(), Vec3::Ones(), {1, 1, 1}); }

TetDomain box(const Vec3& extents, const std::array<int, 3>& cells) {
  return grid_domain(Vec3::Zero(), extents, cells);
}

TetDomain l_shape(double size, double height, int n, int layers) {
  const int half = n / 2;
  return grid_domain(Vec3::Zero(), Vec3(size, size, height), {n, n, layers},
                     [half](int i, int j, int) { return i < half || j < half; });
}

TetDomain ball(double radius, int n) {
  LatticeMesh lm = kuhn_lattice({n, n, n}, false, {});
  std::vector<Vec3> verts;
  verts.reserve(lm.lattice.size());
  for (const auto& c : lm.lattice) {
    const Vec3 p(2.0 * c[0] / n - 1.0, 2.0 * c[1] / n - 1.0, 2.0 * c[2] / n - 1.0);
    verts.push_back(radius * cube_to_ball<3>(p));
  }
  return finish(std::move(verts), std::move(lm.tets));
}

TetDomain torus(double R, double a, int around, int section) {
  LatticeMesh lm = kuhn_lattice({around, section, section}, true, {});
  std::vector<Vec3> verts;
  verts.reserve(lm.lattice.size());
  for (const auto& c : lm.lattice) {
    const double u = 2.0 * std::numbers::pi * c[0] / around;
    const Eigen::Vector2d q =
        a * cube_to_ball<2>(Eigen::Vector2d(2.0 * c[1] / section - 1.0, 2.0 * c[2] / section - 1.0));
    const double rho = R + q.x();
    verts.emplace_back(rho * std::cos(u), rho * std::sin(u), q.y());
  }
  return finish(std::move(verts), std::move(lm.tets));
}

}  // namespace medial::fixtures
