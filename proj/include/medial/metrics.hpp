#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "medial/rpd.hpp"
#include "medial/spheres.hpp"

namespace medial {

/// Frey quality (6 / sqrt 3) S / (p h): S area, p half-perimeter, h longest edge.
inline double triangle_quality(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double la = (b - c).norm(), lb = (a - c).norm(), lc = (a - b).norm();
  const double area = 0.5 * (b - a).cross(c - a).norm();
  const double p = 0.5 * (la + lb + lc);
  const double h = std::max({la, lb, lc});
  if (!(area > 0.0) || !(p * h > 0.0)) return 0.0;
  return std::min(1.0, 6.0 / std::sqrt(3.0) * area / (p * h));
}

struct QualityStats {
  double avg = 0.0;
  double p85 = 0.0;
  double p90 = 0.0;
  std::size_t faces = 0;
  /// One entry per mesh face; -1 for invalid faces.
  std::vector<double> per_face;
};

QualityStats triangle_quality(const MedialMesh& mesh);

/// V - E + F over valid elements; every sphere counts as a vertex.
long euler_characteristic(const MedialMesh& mesh);

struct TopologyReport {
  long chi = 0;
  long expected = 0;
  int ter = 0;
};

/// Compares against half the Euler characteristic of the boundary.
TopologyReport ter(const MedialMesh& mesh, const TetDomain& domain);

struct TangentRecovery {
  std::vector<SurfacePoint> tangents;
  int steps = 0;
  bool found = false;
};

inline constexpr int kTangentShiftSteps = 10;
inline constexpr double kTangentShiftFraction = 0.01;

/// Closest point plus a second tangent in a different sub-volume, searched by
/// shifting the center away from the first one.
TangentRecovery recover_second_tangent(const Sphere& sphere, const ClosestPointIndex& surface,
                                       const TetDomain& domain);

struct MserReport {
  double ratio = 0.0;
  std::size_t seam_spheres = 0;
  std::size_t junction_spheres = 0;
  std::size_t misclassified = 0;
  /// Tangent count per sphere; -1 for spheres outside the seam and junction classes.
  std::vector<int> tangent_counts;
};

/// Representative tangents of a seam or junction sphere, one per cluster of the
/// tangents recovered at its subdivided sheet neighbours.
int seam_tangent_count(const MedialMesh& mesh, int sphere, const ClosestPointIndex& surface,
                       const SurfaceRings& rings, const TetDomain& domain, double sigma);

MserReport mser(const MedialMesh& mesh, const TetDomain& domain, const ClosestPointIndex& surface, double sigma);

/// Union of spheres, cones and slabs interpolated over the valid mesh.
class Envelope {
 public:
  explicit Envelope(const MedialMesh& mesh);
  ~Envelope();
  Envelope(Envelope&&) noexcept;
  Envelope& operator=(Envelope&&) noexcept;

  /// min over primitives of (distance to interpolated center - interpolated radius).
  double signed_distance(const Vec3& x) const;
  bool empty() const;
  /// Medial point and radius on a random primitive, area-free uniform choice.
  std::pair<Vec3, double> random_medial_point(std::uint64_t& state) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct HausdorffReport {
  double surface_to_envelope = 0.0;
  double envelope_to_surface = 0.0;
  double hd = 0.0;
  double hd_pct = 0.0;
};

inline constexpr int kDefaultHausdorffSamples = 100000;

HausdorffReport hausdorff(const MedialMesh& mesh, const TetDomain& domain, const ClosestPointIndex& surface,
                          int n_samples = kDefaultHausdorffSamples, std::uint64_t seed = 1);

/// Kernel width of a mesh: c_sigma sqrt(area / n) over valid faces.
double mesh_sigma(const MedialMesh& mesh, double c_sigma);

struct MetricsReport {
  MserReport mser;
  QualityStats tq;
  TopologyReport topology;
  HausdorffReport hd;
  double sigma = 0.0;
  std::size_t spheres = 0;
  std::size_t edges = 0;
  std::size_t faces = 0;
  std::size_t sheets = 0;
  std::size_t seams = 0;
  std::size_t junctions = 0;
  std::size_t spikes = 0;
};

struct MetricsOptions {
  double c_sigma = 0.3;
  int hausdorff_samples = kDefaultHausdorffSamples;
  std::uint64_t seed = 1;
};

/// All metrics for a classified, structured mesh in normalized coordinates.
MetricsReport compute_metrics(const MedialMesh& mesh, const TetDomain& domain, const MetricsOptions& options);

}  // namespace medial
