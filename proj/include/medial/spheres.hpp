#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "medial/geom/closest_point.hpp"
#include "medial/rpd.hpp"

namespace medial {

enum class SqemCase { FullRank, Line, Plane, Under };

std::string_view to_string(SqemCase c);

inline constexpr double kDefaultTauRank = 1e-2;

/// Least-squares system over m = (center, radius) built from the tangent-plane
/// constraints n . center + r = n . p of each sample.
struct SqemSystem {
  Mat4 normal = Mat4::Zero();  // sum of w a a^T
  Vec4 rhs = Vec4::Zero();     // sum of w a b
  double constant = 0.0;       // sum of w b^2
  /// Singular values of the weighted constraint matrix, descending.
  Vec4 singular_values = Vec4::Zero();
  /// Matching right singular vectors as columns.
  Mat4 singular_vectors = Mat4::Identity();
  SqemCase label = SqemCase::Under;
  /// LINE: unit spatial direction of the solution line.
  Vec3 direction = Vec3::Zero();
  /// PLANE: unit spatial normal of the solution plane.
  Vec3 plane_normal = Vec3::Zero();
  double tau_rank = kDefaultTauRank;
  /// Objective value at the least-squares minimizer.
  double residual = 0.0;
};

class SqemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

SqemSystem assemble_sqem(std::span<const CellSample> samples, double tau_rank = kDefaultTauRank);
SqemSystem assemble_sqem(const PowerCell& cell, double tau_rank = kDefaultTauRank);

SqemCase classify_case(const Vec4& singular_values, double tau_rank);
inline SqemCase classify_case(const SqemSystem& system) {
  return classify_case(system.singular_values, system.tau_rank);
}

/// Objective sum of w (n . center + r - n . p)^2 at a sphere.
double sqem_energy(const SqemSystem& system, const Sphere& sphere);

/// Closest point of the solution set to the current sphere in (center, radius)
/// space; radius clamped at zero. Throws SqemError for UNDER.
Sphere solve_sqem(const SqemSystem& system, const Sphere& current);

struct ShrinkResult {
  Sphere sphere;
  SurfacePoint tangent;  // second contact
  int iterations = 0;
  bool converged = false;
};

/// Largest empty ball tangent at the pin, found by iterated radius shrinking.
ShrinkResult shrink_sphere(const SurfacePoint& pin, const ClosestPointFn& closest, double bbox_diag);
ShrinkResult shrink_sphere(const SurfacePoint& pin, const ClosestPointIndex& surface, double bbox_diag);

/// Boundary triangle neighbourhoods.
class SurfaceRings {
 public:
  explicit SurfaceRings(const TetDomain& domain);
  /// The given triangles plus every triangle of the same smooth patch sharing a
  /// vertex with one of them.
  std::vector<int> one_ring(std::span<const int> tris) const;

 private:
  std::vector<std::array<int, 3>> tris_;
  std::vector<int> patch_;
  std::vector<std::vector<int>> vertex_tris_;
};

/// Footpoint triangles of each cluster, grown by one ring.
std::vector<std::vector<int>> tangent_regions(std::span<const CellSample> samples, const Clusters& clusters,
                                              const SurfaceRings& rings);

struct TangentResult {
  Sphere sphere;
  /// max over regions of | |p_c - center| - r |.
  double residual = 0.0;
  int iterations = 0;
  bool ok = false;
};

/// Gauss-Newton on sum_c (|p_c - center| - r)^2, p_c the closest point of region c.
TangentResult optimize_sphere_tangents(const Sphere& sphere, const std::vector<std::vector<int>>& regions,
                                       const ClosestPointIndex& surface, double bbox_diag);

struct ProjectionOptions {
  double tau_rank = kDefaultTauRank;
  /// Fallback threshold on the tangency residual, relative to bbox_diag.
  double max_tangent_residual = 1e-3;
};

struct ProjectionResult {
  Sphere sphere;
  SqemCase sqem_case = SqemCase::Under;
  bool shrunk = false;
};

/// SQEM solve, tangent refinement, and shrinking fallback; the radius ends at
/// the exact distance to the boundary. Pinned spheres pass through unchanged.
ProjectionResult project_sphere(const Sphere& sphere, const PowerCell& cell, const RpdContext& ctx,
                                const SurfaceRings& rings, const ProjectionOptions& options = {});

}  // namespace medial
