#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "medial/geom/closest_point.hpp"
#include "medial/geom/convex_cell.hpp"
#include "medial/mesh_io.hpp"

namespace medial {

enum class SphereClass : std::uint8_t {
  T2_sheet,
  T3_seam,
  T4_junction,
  T1_2_feature_edge,
  T1_3_corner,
  T1_spike,
  unknown,
};

std::string_view to_string(SphereClass klass);

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  SphereClass klass = SphereClass::unknown;
  bool pinned = false;
};

/// Power distance ||x - c||^2 - r^2.
inline double power_distance(const Sphere& s, const Vec3& x) {
  return (x - s.center).squaredNorm() - s.radius * s.radius;
}

/// Half-space of points closer (in power distance) to a than to b.
Plane power_bisector(const Sphere& a, const Sphere& b, int b_index);

/// Interior point of a cell with its nearest boundary point.
struct CellSample {
  Vec3 x = Vec3::Zero();
  SurfacePoint foot;
  /// Unit direction from x toward the footpoint; the outward facet normal when x is on the surface.
  Vec3 n = Vec3::Zero();
  /// Represented volume (zero for face samples).
  double weight = 0.0;
};

struct BisectorFace {
  int neighbor = -1;
  double area = 0.0;
  std::vector<CellSample> samples;
};

/// Segment where the cell meets two neighbours at once (a power-diagram edge).
struct PowerEdge {
  int j = -1, k = -1;  // j < k
  double length = 0.0;
};

/// One sphere's power cell restricted to the domain.
struct PowerCell {
  int sphere_id = -1;
  std::vector<ConvexCellPiece> pieces;
  /// Neighbours sharing a bisector face of positive area, sorted by id.
  std::vector<int> neighbor_ids;
  /// All bisector faces found on this side, sorted by neighbour.
  std::vector<BisectorFace> faces;
  std::vector<PowerEdge> power_edges;
  /// Triples (j, k, l) of neighbours meeting this cell at an interior power vertex.
  std::vector<std::array<int, 3>> power_vertices;
  std::vector<CellSample> samples;
  double volume = 0.0;
  bool touches_boundary = false;

  bool empty() const { return pieces.empty(); }
  bool contains(const Vec3& x, double eps) const;
  const BisectorFace* face_with(int neighbor) const;
};

/// Shared per-domain acceleration structures.
class RpdContext {
 public:
  explicit RpdContext(const TetDomain& domain);
  ~RpdContext();
  RpdContext(const RpdContext&) = delete;
  RpdContext& operator=(const RpdContext&) = delete;

  const TetDomain& domain() const { return domain_; }
  const ClosestPointIndex& surface() const { return surface_; }
  double eps() const { return domain_.eps(); }
  std::vector<int> tets_overlapping(const Eigen::AlignedBox3d& box) const;
  /// Point-in-domain test against the tetrahedra, with tolerance eps.
  bool contains(const Vec3& x) const;

 private:
  struct TetTree;
  const TetDomain& domain_;
  ClosestPointIndex surface_;
  std::unique_ptr<TetTree> tree_;
};

/// Restricted power diagram of `spheres` over the domain. Cells are returned in
/// sphere order; exact duplicates keep only the lowest index.
std::vector<PowerCell> compute_rpd(const RpdContext& ctx, std::span<const Sphere> spheres);
std::vector<PowerCell> compute_rpd(const TetDomain& domain, std::span<const Sphere> spheres);

struct SamplingOptions {
  int samples_per_cell = 64;
  int min_per_piece = 4;
  int samples_per_face = 12;
};

/// Fills cell.samples (volumetric) and the samples of each bisector face.
void sample_cell(PowerCell& cell, const ClosestPointIndex& surface, const SamplingOptions& options,
                 std::uint64_t seed);

/// Samples all cells in parallel; cell i uses a seed derived from (seed, i).
void sample_cells(std::vector<PowerCell>& cells, const ClosestPointIndex& surface,
                  const SamplingOptions& options, std::uint64_t seed);

inline constexpr double kClusterAngle = 30.0 * std::numbers::pi / 180.0;

/// Footpoint proximity for a sphere of radius r: 2 r sin(angle / 2).
double cluster_distance(double radius);

/// Whether two samples see the same local sub-volume.
bool same_subvolume(const CellSample& a, const CellSample& b, double delta,
                    const std::vector<int>& tri_patch);

/// Clusters of sample indices, largest first (ties by smallest member).
using Clusters = std::vector<std::vector<int>>;
Clusters cluster_samples(std::span<const CellSample> samples, double delta,
                         const std::vector<int>& tri_patch);
Clusters subvolume_clusters(const PowerCell& cell, double radius, const TetDomain& domain);

struct MedialEdge {
  int a = -1, b = -1;  // a < b
  bool valid = true;
};

struct MedialFace {
  std::array<int, 3> v{};  // ascending
  bool valid = true;
  int sheet = -1;
};

/// Spheres with the dual edges and triangles of their power diagram.
struct MedialMesh {
  std::vector<Sphere> spheres;
  /// Edges and faces are kept in ascending vertex order; lookups rely on it.
  std::vector<MedialEdge> edges;
  std::vector<MedialFace> faces;
  /// Interior power vertices, i.e. dual tetrahedra; ascending quadruples.
  std::vector<std::array<int, 4>> cells;
  std::vector<std::vector<int>> seams;
  std::vector<int> junctions;
  std::vector<char> touches_boundary;

  int find_edge(int a, int b) const;
  int find_face(int a, int b, int c) const;
  /// Valid edge and face counts.
  std::size_t valid_edge_count() const;
  std::size_t valid_face_count() const;
};

MedialMesh dual_medial_mesh(std::span<const PowerCell> cells, std::span<const Sphere> spheres,
                            double eps);

/// Polygon soup of all cell faces, with owning sphere and face tag per face.
void write_cells_ply(std::span<const PowerCell> cells, const std::filesystem::path& path);

}  // namespace medial
