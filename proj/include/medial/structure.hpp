#pragma once

#include <span>
#include <vector>

#include "medial/rpd.hpp"

namespace medial {

/// Seams run between these classes.
bool is_seam_class(SphereClass klass);

/// Class from the number of sub-volume clusters; pinned feature spheres keep theirs.
SphereClass classify_sphere(std::size_t cluster_count, const Sphere& sphere);
SphereClass classify_sphere(const PowerCell& cell, const Clusters& clusters, const Sphere& sphere);

/// Whether two clustered sample sets see the same sub-volumes: every cluster of
/// one side matches some cluster of the other, in both directions.
bool same_subvolume_sets(std::span<const CellSample> a, const Clusters& ca, std::span<const CellSample> b,
                         const Clusters& cb, double delta, const std::vector<int>& tri_patch);

/// Per-edge validity under the bisector-face rule: the face's samples must see
/// the same sub-volumes as one of the two endpoint cells.
std::vector<char> edge_rule_validity(const MedialMesh& mesh, std::span<const PowerCell> cells,
                                     std::span<const Clusters> clusters, const TetDomain& domain);

/// Marks rule-invalid edges and every face touching them invalid.
MedialMesh prune_invalid(MedialMesh mesh, std::span<const PowerCell> cells, std::span<const Clusters> clusters,
                         const TetDomain& domain);

struct PruneStats {
  std::size_t invalid_by_rule = 0;
  std::size_t edges_removed = 0;
  std::size_t faces_removed = 0;
};

/// Topology-preserving pruning: a rule-invalid edge bounding exactly one valid
/// face is removed together with that face, repeated until none is left.
PruneStats collapse_invalid(MedialMesh& mesh, const std::vector<char>& rule_valid);

/// 4-cliques whose four triangles are all valid.
std::vector<std::array<int, 4>> find_pockets(const MedialMesh& mesh);

struct ThinStats {
  std::size_t pockets = 0;
  std::size_t faces_removed = 0;
  /// Removals of a face shared by several pockets.
  std::size_t forced = 0;
};

/// Opens every pocket by removing one face, preferring faces in a single pocket,
/// then faces with a rule-invalid edge, then the lowest triangle quality.
ThinStats enforce_thinness(MedialMesh& mesh, const std::vector<char>* rule_valid = nullptr);

/// Sheet ids, seam chains and junctions from the sphere classes.
MedialMesh extract_structure(MedialMesh mesh);

}  // namespace medial
