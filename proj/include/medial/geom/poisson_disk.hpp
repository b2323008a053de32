#pragma once

#include <cstdint>
#include <vector>

#include "medial/geom/closest_point.hpp"
#include "medial/mesh_io.hpp"

namespace medial {

/// Relative lattice step of the gap-filling pass. Every surface point ends up
/// within radius * (1 + kPoissonFillStep) of a sample.
inline constexpr double kPoissonFillStep = 1.0 / 16.0;

/// Maximal Poisson-disk sample of the boundary surface with minimum spacing
/// `radius`. Concave-sharp edges are seeded first at the same spacing.
/// Deterministic for a given seed.
std::vector<SurfacePoint> poisson_disk_samples(const TetDomain& domain, double radius,
                                               std::uint64_t seed = 1);

/// Pins with spacing bbox_diag / gamma.
std::vector<SurfacePoint> poisson_disk_pins(const TetDomain& domain, double gamma,
                                            std::uint64_t seed = 1);

/// Points along concave-sharp edges at roughly `spacing` apart, normals averaged
/// between the two incident facets.
std::vector<SurfacePoint> concave_edge_points(const TetDomain& domain, double spacing);

/// Uniform area-weighted random surface samples.
std::vector<SurfacePoint> uniform_surface_samples(const TetDomain& domain, std::size_t count,
                                                  std::uint64_t seed = 1);

}  // namespace medial
