#pragma once

#include <array>
#include <functional>

#include "medial/mesh_io.hpp"

namespace medial::fixtures {

/// Structured grid over [lo, hi] with `cells` per axis, each cell split into
/// six tetrahedra along the main diagonal. `keep(i, j, k)` selects cells.
TetDomain grid_domain(const Vec3& lo, const Vec3& hi, const std::array<int, 3>& cells,
                      const std::function<bool(int, int, int)>& keep = {});

/// Unit cube as six tetrahedra.
TetDomain unit_cube();

/// Axis-aligned box with the given extents.
TetDomain box(const Vec3& extents, const std::array<int, 3>& cells);

/// L-shaped prism: an n x n square with one quadrant removed, extruded by `height`.
TetDomain l_shape(double size, double height, int n, int layers);

/// Ball of the given radius, made by pushing a cube grid out to the sphere.
TetDomain ball(double radius, int n);

/// Solid torus with tube centre radius R and tube radius a.
TetDomain torus(double R, double a, int around, int section);

}  // namespace medial::fixtures
