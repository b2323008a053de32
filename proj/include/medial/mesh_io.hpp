#pragma once

#include <array>
#include <filesystem>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "medial/common.hpp"

namespace medial {

enum class MeshErrorKind {
  Io,
  Parse,
  IndexOutOfRange,
  InvertedTet,
  NonManifold,
  MultipleComponents,
  DegenerateBBox,
};

class MeshError : public std::runtime_error {
 public:
  MeshError(MeshErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  MeshErrorKind kind() const noexcept { return kind_; }

 private:
  MeshErrorKind kind_;
};

enum class Sharpness { ConvexSharp, ConcaveSharp };

struct FeatureEdge {
  int edge = -1;  // index into TetDomain::boundary_edges
  Sharpness kind = Sharpness::ConvexSharp;
};

/// Tetrahedral volume with its boundary surface and sharp features.
///
/// Immutable after construction by build_domain / load_tet_mesh; every
/// function below returns a new value.
struct TetDomain {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tets;
  /// Outward-oriented boundary triangles.
  std::vector<std::array<int, 3>> boundary_tris;
  /// Unique undirected boundary edges, (lo, hi) vertex order.
  std::vector<std::array<int, 2>> boundary_edges;
  /// The two boundary triangles incident to each boundary edge.
  std::vector<std::array<int, 2>> edge_tris;
  /// For tet t and local face f (opposite vertex f): boundary triangle index or -1.
  std::vector<std::array<int, 4>> tet_face_boundary;

  std::vector<FeatureEdge> feature_edges;
  std::vector<int> feature_corners;
  /// Vertex chains along convex-sharp edges; closed loops repeat the first vertex.
  std::vector<std::vector<int>> feature_polylines;
  /// Smooth patch id per boundary triangle; patches are separated by convex-sharp edges.
  std::vector<int> tri_patch;

  Vec3 bbox_min = Vec3::Zero();
  Vec3 bbox_max = Vec3::Zero();
  double bbox_diag = 0.0;

  double eps() const { return kRelGeomEps * bbox_diag; }
  bool is_convex_sharp_edge(int edge) const;
};

/// Uniform scale + translation taking normalized coordinates back to input units.
struct AffineTransform {
  double scale = 1.0;        // normalized = (input - offset) * scale
  Vec3 offset = Vec3::Zero();

  Vec3 to_input(const Vec3& p) const { return p / scale + offset; }
  Vec3 to_normalized(const Vec3& p) const { return (p - offset) * scale; }
  double length_to_input(double l) const { return l / scale; }
  double length_to_normalized(double l) const { return l * scale; }
};

/// Validates the raw arrays and derives the boundary surface. When
/// `triangles` is given they must be faces incident to exactly one tet; they
/// are reoriented outward.
TetDomain build_domain(std::vector<Vec3> vertices,
                       std::vector<std::array<int, 4>> tets,
                       std::optional<std::vector<std::array<int, 3>>> triangles = std::nullopt);

/// Reads MEDIT `.mesh` (ASCII) or legacy `.vtk` unstructured grids.
TetDomain load_tet_mesh(const std::filesystem::path& path);

std::pair<TetDomain, AffineTransform> normalize(const TetDomain& domain);

inline constexpr double kDefaultFeatureAngle = std::numbers::pi / 6.0;

/// Flags boundary edges whose interior dihedral angle is below pi - phi
/// (convex-sharp) or above pi + phi (concave-sharp). `manual_edges` are vertex
/// pairs forced to convex-sharp. phi = 0 disables automatic detection.
TetDomain detect_features(TetDomain domain, double phi,
                          const std::vector<std::array<int, 2>>& manual_edges = {});

/// Sidecar format: one "i j" vertex pair per line (0-based), '#' comments.
std::vector<std::array<int, 2>> load_feature_sidecar(const std::filesystem::path& path);

void write_medit(const TetDomain& domain, const std::filesystem::path& path);

/// Interior dihedral angle at boundary edge `edge` (pi for flat).
double interior_dihedral(const TetDomain& domain, int edge);

double tet_volume(const TetDomain& domain, int tet);
double domain_volume(const TetDomain& domain);
/// Volume enclosed by the boundary surface via the divergence theorem.
double enclosed_volume(const TetDomain& domain);
double boundary_area(const TetDomain& domain);
Vec3 triangle_normal(const TetDomain& domain, int tri);
/// Euler characteristic V - E + F of the boundary surface.
int boundary_euler_characteristic(const TetDomain& domain);

}  // namespace medial
