#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "medial/rpd.hpp"
#include "medial/spheres.hpp"
#include "medial/structure.hpp"

namespace medial {

struct PipelineConfig {
  double gamma = 40.0;
  double c_sigma = 0.3;
  double phi_deg = 30.0;
  int knn = 10;
  double grad_tol = 5e-3;
  double outer_tol = 3e-4;
  int max_outer = 30;
  std::uint64_t seed = 1;
  int samples_per_cell = 64;
  double tau_rank = kDefaultTauRank;
  int lbfgs_memory = 7;
  int max_inner = 100;
  /// Refresh the neighbour lists at every energy evaluation, else once per inner loop.
  bool knn_per_evaluation = true;
  /// Cap on feature-preserving insertions per pass, as a fraction of the sphere count.
  double insertion_cap = 0.2;
};

/// c_sigma sqrt(area / n).
double compute_sigma(double area, std::size_t n, double c_sigma);

struct PairTerm {
  double energy = 0.0;
  /// Derivative of the pair energy with respect to the position of particle i.
  Vec3 force = Vec3::Zero();
};

/// exp(-d^2 / (2 sigma^2)) and its gradient ((tj - ti) / sigma^2) E.
PairTerm particle_pair(const Vec3& ti, const Vec3& tj, double sigma);

/// Undirected neighbour lists: j is a neighbour of i when either lists the other
/// among its k nearest.
std::vector<std::vector<int>> symmetric_neighbors(std::span<const Vec3> centers, int k);

struct EnergyForces {
  /// Double sum over ordered neighbour pairs.
  double energy = 0.0;
  /// Sum of pair forces per particle; the gradient of energy / 2.
  std::vector<Vec3> forces;
};

EnergyForces total_energy_forces(std::span<const Vec3> centers, const std::vector<std::vector<int>>& neighbors,
                                 double sigma);

/// 3x3 projector for the motion allowed by an SQEM case.
Mat3 gradient_projector(const SqemSystem& system);
Vec3 project_gradient(const Vec3& force, const SqemSystem& system);

struct InnerLoopResult {
  int iterations = 0;
  int evaluations = 0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double grad_max = 0.0;
  bool converged = false;
  bool line_search_failed = false;
};

/// L-BFGS over the unpinned centers with projected gradients. `projectors`
/// holds one matrix per sphere; radii are left untouched.
InnerLoopResult inner_loop(std::vector<Sphere>& spheres, std::span<const Mat3> projectors, double sigma,
                           const PipelineConfig& config);

struct InitStats {
  std::size_t pins = 0;
  std::size_t shrunk = 0;
  std::size_t merged = 0;
  std::size_t feature_edge_spheres = 0;
  std::size_t corner_spheres = 0;
};

/// Shrunk spheres from Poisson pins, deduplicated, followed by pinned zero-radius
/// spheres along convex-sharp polylines and on corners.
std::vector<Sphere> initialize(const RpdContext& ctx, const PipelineConfig& config, InitStats* stats = nullptr);

/// One RPD pass: cells, samples, clusters, SQEM systems, classes and dual mesh.
struct Analysis {
  std::vector<PowerCell> cells;
  std::vector<Clusters> clusters;
  std::vector<SqemSystem> systems;
  MedialMesh mesh;
  std::size_t seam_spheres = 0;
  std::size_t junction_spheres = 0;
};

/// Removes unpinned spheres whose cells are empty, then analyzes. Sphere classes
/// are updated in place.
Analysis analyze(std::vector<Sphere>& spheres, const RpdContext& ctx, const PipelineConfig& config,
                 std::uint64_t pass);

/// Inserts spheres at midpoints of edges whose bisector face sees three or more
/// sub-volumes while neither endpoint is a seam or junction sphere. Returns the
/// number inserted.
/// Candidates closer than sigma / 4 to an existing center are dropped.
std::size_t preserve_features(std::vector<Sphere>& spheres, const Analysis& analysis, const RpdContext& ctx,
                              const SurfaceRings& rings, double sigma, const PipelineConfig& config);

struct OuterRecord {
  int outer = 0;
  double energy = 0.0;
  double grad_max = 0.0;
  int inner_iterations = 0;
  bool line_search_failed = false;
  std::size_t spheres = 0;
  std::size_t seam_spheres = 0;
  std::size_t junction_spheres = 0;
  std::size_t inserted = 0;
  std::size_t shrunk = 0;
  double change_ratio = 0.0;
};

struct PostStats {
  PruneStats prune;
  ThinStats thin;
  /// Rule-valid edges that ended up invalid; always zero by construction.
  std::size_t valid_edges_pruned = 0;
};

struct PipelineResult {
  MedialMesh mesh;
  double sigma = 0.0;
  int outer_iterations = 0;
  bool converged = false;
  InitStats init;
  PostStats post;
  std::vector<OuterRecord> records;
  /// Final analysis the mesh was built from.
  Analysis analysis;
};

struct PipelineHooks {
  /// Called on the initial sphere set before the first pass.
  std::function<void(std::vector<Sphere>&, const RpdContext&)> after_init;
  std::function<void(const OuterRecord&)> on_record;
};

/// Full optimization on a normalized domain.
PipelineResult run_pipeline(const TetDomain& domain, const PipelineConfig& config, const PipelineHooks& hooks = {});

/// Pruning and thinning of a dual mesh followed by structure extraction.
MedialMesh post_process(const Analysis& analysis, const TetDomain& domain, PostStats* stats = nullptr);

}  // namespace medial
