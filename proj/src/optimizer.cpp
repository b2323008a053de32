#include "medial/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "medial/geom/knn.hpp"
#include "medial/geom/poisson_disk.hpp"
#include "medial/lbfgs.hpp"

namespace medial {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double compute_sigma(double area, std::size_t n, double c_sigma) {
  if (n == 0) throw std::invalid_argument("compute_sigma: no spheres");
  if (!(area > 0.0)) throw std::invalid_argument("compute_sigma: area must be positive");
  return c_sigma * std::sqrt(area / static_cast<double>(n));
}

PairTerm particle_pair(const Vec3& ti, const Vec3& tj, double sigma) {
  const Vec3 d = tj - ti;
  const double s2 = sigma * sigma;
  PairTerm t;
  t.energy = std::exp(-d.squaredNorm() / (2.0 * s2));
  t.force = d / s2 * t.energy;
  return t;
}

std::vector<std::vector<int>> symmetric_neighbors(std::span<const Vec3> centers, int k) {
  auto lists = knn(centers, k);
  std::vector<std::vector<int>> out(lists.size());
  for (int i = 0; i < static_cast<int>(lists.size()); ++i)
    for (int j : lists[i]) {
      out[i].push_back(j);
      out[j].push_back(i);
    }
  for (auto& l : out) {
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
  }
  return out;
}

EnergyForces total_energy_forces(std::span<const Vec3> centers, const std::vector<std::vector<int>>& neighbors,
                                 double sigma) {
  const std::size_t n = centers.size();
  EnergyForces out;
  out.forces.assign(n, Vec3::Zero());
  std::vector<double> energy(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    for (int j : neighbors[i]) {
      if (static_cast<std::size_t>(j) == i) continue;
      const PairTerm t = particle_pair(centers[i], centers[j], sigma);
      energy[i] += t.energy;
      out.forces[i] += t.force;
    }
  });
  for (double e : energy) out.energy += e;
  return out;
}

Mat3 gradient_projector(const SqemSystem& system) {
  switch (system.label) {
    case SqemCase::Line:
      return system.direction * system.direction.transpose();
    case SqemCase::Plane:
      return Mat3::Identity() - system.plane_normal * system.plane_normal.transpose();
    case SqemCase::FullRank:
    case SqemCase::Under:
      break;
  }
  return Mat3::Zero();
}

Vec3 project_gradient(const Vec3& force, const SqemSystem& system) { return gradient_projector(system) * force; }

InnerLoopResult inner_loop(std::vector<Sphere>& spheres, std::span<const Mat3> projectors, double sigma,
                           const PipelineConfig& config) {
  InnerLoopResult res;
  const int n = static_cast<int>(spheres.size());
  std::vector<int> free;
  for (int i = 0; i < n; ++i)
    if (!spheres[i].pinned && !projectors[i].isZero(0.0)) free.push_back(i);

  std::vector<Vec3> centers(n);
  for (int i = 0; i < n; ++i) centers[i] = spheres[i].center;
  const int k = std::min(config.knn, std::max(n - 1, 0));
  const auto fixed_neighbors = symmetric_neighbors(centers, k);

  auto evaluate = [&](const std::vector<Vec3>& c, Eigen::VectorXd* g) {
    const auto neighbors = config.knn_per_evaluation ? symmetric_neighbors(c, k) : fixed_neighbors;
    const EnergyForces ef = total_energy_forces(c, neighbors, sigma);
    if (g != nullptr)
      for (std::size_t f = 0; f < free.size(); ++f)
        g->segment<3>(3 * f) = projectors[free[f]] * ef.forces[free[f]];
    return ef.energy;
  };
  res.energy_before = evaluate(centers, nullptr);
  res.energy_after = res.energy_before;
  if (free.empty()) {
    res.converged = true;
    return res;
  }

  Eigen::VectorXd x(3 * free.size());
  for (std::size_t f = 0; f < free.size(); ++f) x.segment<3>(3 * f) = centers[free[f]];
  std::vector<Vec3> work = centers;
  const Objective fg = [&](const Eigen::VectorXd& xv, Eigen::VectorXd& g) {
    for (std::size_t f = 0; f < free.size(); ++f) work[free[f]] = xv.segment<3>(3 * f);
    return 0.5 * evaluate(work, &g);
  };
  LbfgsOptions opt;
  opt.memory = config.lbfgs_memory;
  opt.max_iterations = config.max_inner;
  opt.grad_tol = config.grad_tol;
  opt.max_step = sigma;
  const LbfgsResult lr = lbfgs_minimize(x, fg, opt);

  for (std::size_t f = 0; f < free.size(); ++f) spheres[free[f]].center = x.segment<3>(3 * f);
  res.iterations = lr.iterations;
  res.evaluations = lr.evaluations;
  res.energy_after = 2.0 * lr.f;
  res.grad_max = lr.grad_max;
  res.converged = lr.converged;
  res.line_search_failed = lr.line_search_failed;
  return res;
}

namespace {

void place_feature_spheres(const TetDomain& domain, double spacing, std::vector<Sphere>& out, InitStats& stats) {
  auto add = [&](const Vec3& p, SphereClass klass) {
    Sphere s;
    s.center = p;
    s.radius = 0.0;
    s.klass = klass;
    s.pinned = true;
    out.push_back(s);
  };
  for (const auto& line : domain.feature_polylines) {
    if (line.size() < 2) continue;
    const bool closed = line.front() == line.back();
    std::vector<double> arc{0.0};
    for (std::size_t i = 1; i < line.size(); ++i)
      arc.push_back(arc.back() + (domain.vertices[line[i]] - domain.vertices[line[i - 1]]).norm());
    const double length = arc.back();
    if (!(length > 0.0)) continue;
    const int segments = std::max(closed ? 3 : 1, static_cast<int>(std::lround(length / spacing)));
    const int first = closed ? 0 : 1;
    std::size_t seg = 1;
    for (int m = first; m < segments; ++m) {
      const double s = length * m / segments;
      while (seg + 1 < arc.size() && arc[seg] < s) ++seg;
      const double t = (s - arc[seg - 1]) / std::max(arc[seg] - arc[seg - 1], 1e-300);
      add((1.0 - t) * domain.vertices[line[seg - 1]] + t * domain.vertices[line[seg]],
          SphereClass::T1_2_feature_edge);
      ++stats.feature_edge_spheres;
    }
  }
  for (int v : domain.feature_corners) {
    add(domain.vertices[v], SphereClass::T1_3_corner);
    ++stats.corner_spheres;
  }
}

}  // namespace

std::vector<Sphere> initialize(const RpdContext& ctx, const PipelineConfig& config, InitStats* stats) {
  const TetDomain& domain = ctx.domain();
  const double diag = domain.bbox_diag;
  InitStats st;
  const auto pins = poisson_disk_pins(domain, config.gamma, config.seed);
  if (pins.empty()) throw std::runtime_error("initialize: no surface pins");
  st.pins = pins.size();

  std::vector<ShrinkResult> shrunk(pins.size());
  parallel_for(pins.size(), [&](std::size_t i) { shrunk[i] = shrink_sphere(pins[i], ctx.surface(), diag); });

  const double spacing = diag / config.gamma;
  const double min_radius = 1e-3 * spacing;
  std::vector<Sphere> candidates;
  for (const auto& s : shrunk) {
    if (!(s.sphere.radius > min_radius) || !ctx.contains(s.sphere.center)) continue;
    Sphere sp = s.sphere;
    sp.radius = ctx.surface().distance(sp.center);
    sp.klass = s.converged ? SphereClass::T2_sheet : SphereClass::T1_spike;
    candidates.push_back(sp);
  }
  st.shrunk = candidates.size();

  const double sigma_est = config.c_sigma * spacing;
  std::vector<Vec3> centers(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) centers[i] = candidates[i].center;
  const KdTree tree(centers);
  std::vector<char> removed(candidates.size(), 0);
  std::vector<Sphere> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (removed[i]) continue;
    out.push_back(candidates[i]);
    for (int j : tree.within(centers[i], sigma_est / 4.0)) {
      if (j <= static_cast<int>(i) || removed[j]) continue;
      const double ratio = candidates[j].radius / candidates[i].radius;
      if (ratio >= 0.9 && ratio <= 1.1) {
        removed[j] = 1;
        ++st.merged;
      }
    }
  }
  place_feature_spheres(domain, spacing, out, st);
  if (stats != nullptr) *stats = st;
  return out;
}

Analysis analyze(std::vector<Sphere>& spheres, const RpdContext& ctx, const PipelineConfig& config,
                 std::uint64_t pass) {
  Analysis a;
  const TetDomain& domain = ctx.domain();
  while (true) {
    a.cells = compute_rpd(ctx, spheres);
    std::vector<Sphere> kept;
    kept.reserve(spheres.size());
    for (std::size_t i = 0; i < spheres.size(); ++i)
      if (spheres[i].pinned || !a.cells[i].empty()) kept.push_back(spheres[i]);
    if (kept.size() == spheres.size()) break;
    spheres = std::move(kept);
  }
  SamplingOptions so;
  so.samples_per_cell = config.samples_per_cell;
  sample_cells(a.cells, ctx.surface(), so, splitmix(config.seed ^ splitmix(pass)));

  const std::size_t n = spheres.size();
  a.clusters.assign(n, {});
  a.systems.assign(n, SqemSystem{});
  parallel_for(n, [&](std::size_t i) {
    const PowerCell& cell = a.cells[i];
    if (!cell.samples.empty()) {
      a.clusters[i] = subvolume_clusters(cell, spheres[i].radius, domain);
      a.systems[i] = assemble_sqem(cell, config.tau_rank);
    } else {
      a.systems[i].tau_rank = config.tau_rank;
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    spheres[i].klass = classify_sphere(a.clusters[i].size(), spheres[i]);
    if (spheres[i].klass == SphereClass::T3_seam) ++a.seam_spheres;
    if (spheres[i].klass == SphereClass::T4_junction) ++a.junction_spheres;
  }
  a.mesh = dual_medial_mesh(a.cells, spheres, ctx.eps());
  return a;
}

std::size_t preserve_features(std::vector<Sphere>& spheres, const Analysis& analysis, const RpdContext& ctx,
                              const SurfaceRings& rings, double sigma, const PipelineConfig& config) {
  const TetDomain& domain = ctx.domain();
  const ClosestPointIndex& surface = ctx.surface();
  const auto& mesh = analysis.mesh;
  const std::size_t n0 = spheres.size();

  std::vector<int> triggered;
  for (int e = 0; e < static_cast<int>(mesh.edges.size()); ++e) {
    const auto& edge = mesh.edges[e];
    if (!edge.valid) continue;
    const auto ka = spheres[edge.a].klass, kb = spheres[edge.b].klass;
    if (ka == SphereClass::T3_seam || ka == SphereClass::T4_junction || kb == SphereClass::T3_seam ||
        kb == SphereClass::T4_junction)
      continue;
    triggered.push_back(e);
  }

  struct Candidate {
    bool ok = false;
    Sphere sphere;
  };
  std::vector<Candidate> cand(triggered.size());
  parallel_for(triggered.size(), [&](std::size_t t) {
    const auto& edge = mesh.edges[triggered[t]];
    const BisectorFace* face = analysis.cells[edge.a].face_with(edge.b);
    if (face == nullptr) face = analysis.cells[edge.b].face_with(edge.a);
    if (face == nullptr || face->samples.size() < 3) return;
    const Vec3 mid = 0.5 * (spheres[edge.a].center + spheres[edge.b].center);
    const double r_mid = surface.distance(mid);
    const Clusters fc = cluster_samples(face->samples, cluster_distance(r_mid), domain.tri_patch);
    if (fc.size() < 3) return;
    Sphere s;
    s.center = mid;
    s.radius = r_mid;
    const TangentResult tr =
        optimize_sphere_tangents(s, tangent_regions(face->samples, fc, rings), surface, domain.bbox_diag);
    if (!tr.ok || tr.residual > 1e-3 * domain.bbox_diag || !ctx.contains(tr.sphere.center)) return;
    s = tr.sphere;
    s.radius = surface.distance(s.center);
    if (!(s.radius > 0.0)) return;
    s.klass = fc.size() >= 4 ? SphereClass::T4_junction : SphereClass::T3_seam;
    s.pinned = false;
    cand[t] = {true, s};
  });

  const auto cap = static_cast<std::size_t>(config.insertion_cap * static_cast<double>(n0));
  std::vector<Vec3> centers(n0);
  for (std::size_t i = 0; i < n0; ++i) centers[i] = spheres[i].center;
  const KdTree tree(centers);
  std::vector<Vec3> added;
  for (const auto& c : cand) {
    if (added.size() >= cap) break;
    if (!c.ok) continue;
    if (!tree.within(c.sphere.center, sigma / 4.0).empty()) continue;
    bool close = false;
    for (const auto& p : added)
      if ((p - c.sphere.center).norm() < sigma / 4.0) {
        close = true;
        break;
      }
    if (close) continue;
    added.push_back(c.sphere.center);
    spheres.push_back(c.sphere);
  }
  return added.size();
}

MedialMesh post_process(const Analysis& analysis, const TetDomain& domain, PostStats* stats) {
  MedialMesh mesh = analysis.mesh;
  const auto rule = edge_rule_validity(mesh, analysis.cells, analysis.clusters, domain);
  std::vector<char> before(mesh.edges.size());
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) before[e] = mesh.edges[e].valid;

  PostStats st;
  st.prune = collapse_invalid(mesh, rule);
  st.thin = enforce_thinness(mesh, &rule);
  const PruneStats again = collapse_invalid(mesh, rule);
  st.prune.edges_removed += again.edges_removed;
  st.prune.faces_removed += again.faces_removed;
  for (std::size_t e = 0; e < mesh.edges.size(); ++e)
    if (before[e] && rule[e] && !mesh.edges[e].valid) ++st.valid_edges_pruned;
  if (stats != nullptr) *stats = st;
  return extract_structure(std::move(mesh));
}

namespace {

double valid_face_area(const MedialMesh& mesh) {
  double area = 0.0;
  for (const auto& f : mesh.faces) {
    if (!f.valid) continue;
    const Vec3& a = mesh.spheres[f.v[0]].center;
    area += 0.5 * (mesh.spheres[f.v[1]].center - a).cross(mesh.spheres[f.v[2]].center - a).norm();
  }
  return area;
}

}  // namespace

PipelineResult run_pipeline(const TetDomain& domain, const PipelineConfig& config, const PipelineHooks& hooks) {
  PipelineResult res;
  const RpdContext ctx(domain);
  const SurfaceRings rings(domain);
  std::vector<Sphere> spheres = initialize(ctx, config, &res.init);
  if (hooks.after_init) hooks.after_init(spheres, ctx);

  ProjectionOptions popt;
  popt.tau_rank = config.tau_rank;
  double sigma = 0.0;
  std::size_t prev_count = 0;
  bool have_analysis = false;
  Analysis analysis;
  for (int outer = 0; outer < config.max_outer; ++outer) {
    analysis = analyze(spheres, ctx, config, static_cast<std::uint64_t>(outer));
    have_analysis = true;
    if (outer == 0) {
      const double area = valid_face_area(analysis.mesh);
      sigma = area > 0.0 ? compute_sigma(area, spheres.size(), config.c_sigma)
                         : config.c_sigma * domain.bbox_diag / config.gamma;
      res.sigma = sigma;
    }
    OuterRecord rec;
    rec.outer = outer;
    rec.seam_spheres = analysis.seam_spheres;
    rec.junction_spheres = analysis.junction_spheres;
    const std::size_t count = analysis.seam_spheres + analysis.junction_spheres;
    if (outer > 0) {
      const std::size_t denom = std::max(count, prev_count);
      rec.change_ratio =
          denom == 0 ? 0.0 : std::abs(static_cast<double>(count) - static_cast<double>(prev_count)) / denom;
      if (rec.change_ratio < config.outer_tol) {
        res.converged = true;
        std::vector<Vec3> centers(spheres.size());
        for (std::size_t i = 0; i < spheres.size(); ++i) centers[i] = spheres[i].center;
        const int k = std::min(config.knn, std::max(static_cast<int>(spheres.size()) - 1, 0));
        rec.energy = total_energy_forces(centers, symmetric_neighbors(centers, k), sigma).energy;
        rec.spheres = spheres.size();
        res.records.push_back(rec);
        if (hooks.on_record) hooks.on_record(rec);
        res.outer_iterations = outer;
        break;
      }
    }
    prev_count = count;

    std::vector<Mat3> projectors(spheres.size());
    for (std::size_t i = 0; i < spheres.size(); ++i) projectors[i] = gradient_projector(analysis.systems[i]);
    const InnerLoopResult inner = inner_loop(spheres, projectors, sigma, config);
    rec.energy = inner.energy_after;
    rec.grad_max = inner.grad_max;
    rec.inner_iterations = inner.iterations;
    rec.line_search_failed = inner.line_search_failed;

    std::vector<ProjectionResult> proj(spheres.size());
    parallel_for(spheres.size(), [&](std::size_t i) {
      Sphere s = spheres[i];
      if (!s.pinned) s.radius = ctx.surface().distance(s.center);
      proj[i] = project_sphere(s, analysis.cells[i], ctx, rings, popt);
    });
    for (std::size_t i = 0; i < spheres.size(); ++i) {
      spheres[i] = proj[i].sphere;
      rec.shrunk += proj[i].shrunk;
    }
    rec.inserted = preserve_features(spheres, analysis, ctx, rings, sigma, config);
    rec.spheres = spheres.size();
    res.records.push_back(rec);
    if (hooks.on_record) hooks.on_record(rec);
    res.outer_iterations = outer + 1;
    have_analysis = false;
  }
  if (!have_analysis) analysis = analyze(spheres, ctx, config, static_cast<std::uint64_t>(config.max_outer));
  res.mesh = post_process(analysis, domain, &res.post);
  res.analysis = std::move(analysis);
  return res;
}

}  // namespace medial
