#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "medial/common.hpp"

namespace medial {

/// Provenance of a clipping plane.
struct PlaneTag {
  enum class Kind : std::uint8_t { Boundary, Bisector, TetInternal, Bounds };
  Kind kind = Kind::Bounds;
  /// Boundary triangle, neighbouring sphere, or -1.
  int id = -1;

  friend bool operator==(const PlaneTag&, const PlaneTag&) = default;
};

/// Half-space n.x + d <= 0.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;
  PlaneTag tag;

  double signed_distance(const Vec3& x) const { return normal.dot(x) + offset; }
};

/// Bounded convex polytope stored in dual form: a list of planes plus the
/// triangles of the dual, each triangle being the vertex where three planes meet.
class ConvexCellPiece {
 public:
  struct Face {
    int plane = -1;
    PlaneTag tag;
    Vec3 normal = Vec3::Zero();
    /// Cyclic loop of vertex indices into vertices().
    std::vector<int> loop;
    double area = 0.0;
  };
  struct Edge {
    int plane_a = -1, plane_b = -1;
    int v0 = -1, v1 = -1;
    double length = 0.0;
  };

  ConvexCellPiece() = default;

  /// Face f is the one opposite v[f].
  static ConvexCellPiece tetrahedron(const std::array<Vec3, 4>& v, const std::array<PlaneTag, 4>& tags);
  static ConvexCellPiece box(const Vec3& lo, const Vec3& hi);

  /// Intersects with the half-space. Vertices within eps of the plane are
  /// re-attached to the new face, so a face lying on the plane takes its tag.
  /// A piece with no vertex beyond +eps keeps its volume.
  void clip(const Plane& plane, double eps);

  bool empty() const { return verts_.empty(); }
  const std::vector<Vec3>& vertices() const { return verts_; }
  const std::vector<Plane>& planes() const { return planes_; }
  /// Planes meeting at each vertex.
  const std::vector<std::array<int, 3>>& vertex_planes() const { return corners_; }

  std::vector<Face> faces() const;
  std::vector<Edge> edges() const;
  double volume() const;
  Vec3 centroid() const;
  /// Fan tetrahedra (apex, a, b, c) covering the piece, for sampling.
  std::vector<std::array<Vec3, 4>> fan_tets() const;

  int source_tet = -1;

 private:
  std::vector<Plane> planes_;
  std::vector<std::array<int, 3>> corners_;
  std::vector<Vec3> verts_;
};

/// Functional form of ConvexCellPiece::clip; nullopt when nothing remains.
std::optional<ConvexCellPiece> clip_convex(ConvexCellPiece piece, const Plane& plane, double eps);

}  // namespace medial
