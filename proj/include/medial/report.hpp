#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "medial/mesh_io.hpp"
#include "medial/metrics.hpp"
#include "medial/optimizer.hpp"

namespace medial {

/// Writes valid elements only, in input units, with `%.17g` numbers.
///
///   nv ne nf
///   v x y z r      (nv lines)
///   e i j          (ne lines, 0-based)
///   f i j k        (nf lines, 0-based)
void write_ma(const MedialMesh& mesh, const AffineTransform& transform, const std::filesystem::path& path);
std::string format_ma(const MedialMesh& mesh, const AffineTransform& transform);

/// Parsed `.ma` in normalized coordinates; every element is valid and classes are unknown.
/// Edges and faces are sorted and deduplicated.
/// Throws MeshError (Io or Parse).
MedialMesh read_ma(const std::filesystem::path& path, const AffineTransform& transform);

struct EvaluateOptions {
  double c_sigma = 0.3;
  int samples_per_cell = 64;
  double tau_rank = kDefaultTauRank;
  std::uint64_t seed = 1;
  int hausdorff_samples = kDefaultHausdorffSamples;
};

struct Evaluation {
  MedialMesh mesh;
  MetricsReport metrics;
};

/// Classifies the spheres from a fresh RPD, extracts the structure and computes
/// all metrics. `domain` is normalized with features detected.
Evaluation evaluate_mesh(MedialMesh mesh, const TetDomain& domain, const EvaluateOptions& options);

/// ASCII PLY of the valid faces with one color per sheet.
void write_sheets_ply(const MedialMesh& mesh, const AffineTransform& transform, const std::filesystem::path& path);
/// One `l` polyline per seam chain.
void write_seams_obj(const MedialMesh& mesh, const AffineTransform& transform, const std::filesystem::path& path);
/// One vertex per junction sphere.
void write_junctions_obj(const MedialMesh& mesh, const AffineTransform& transform,
                         const std::filesystem::path& path);

nlohmann::json to_json(const MetricsReport& report);
nlohmann::json to_json(const PipelineConfig& config);
nlohmann::json to_json(const OuterRecord& record);

/// Per-sphere class, cluster sizes and SQEM case of one analysis.
nlohmann::json clusters_json(const Analysis& analysis, const AffineTransform& transform);

}  // namespace medial
