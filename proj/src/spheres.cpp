#include "medial/spheres.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace medial {

std::string_view to_string(SqemCase c) {
  switch (c) {
    case SqemCase::FullRank: return "FULL_RANK";
    case SqemCase::Line: return "LINE";
    case SqemCase::Plane: return "PLANE";
    case SqemCase::Under: return "UNDER";
  }
  return "UNDER";
}

namespace {

int rank_of(const Vec4& sv, double tau) {
  if (!(sv[0] > 0.0)) return 0;
  int rank = 0;
  for (int k = 0; k < 4; ++k)
    if (sv[k] / sv[0] > tau) ++rank;
  return rank;
}

Vec4 as_vec4(const Sphere& s) { return Vec4(s.center.x(), s.center.y(), s.center.z(), s.radius); }

double quadratic(const SqemSystem& sys, const Vec4& m) {
  return std::max(0.0, m.dot(sys.normal * m) - 2.0 * sys.rhs.dot(m) + sys.constant);
}

/// Least-squares minimizer restricted to the numerically non-null directions.
Vec4 range_solution(const SqemSystem& sys, int rank) {
  Vec4 m = Vec4::Zero();
  for (int k = 0; k < rank; ++k) {
    const Vec4 u = sys.singular_vectors.col(k);
    const double lambda = sys.singular_values[k] * sys.singular_values[k];
    m += (u.dot(sys.rhs) / lambda) * u;
  }
  return m;
}

}  // namespace

SqemCase classify_case(const Vec4& singular_values, double tau_rank) {
  switch (rank_of(singular_values, tau_rank)) {
    case 4: return SqemCase::FullRank;
    case 3: return SqemCase::Line;
    case 2: return SqemCase::Plane;
    default: return SqemCase::Under;
  }
}

SqemSystem assemble_sqem(std::span<const CellSample> samples, double tau_rank) {
  SqemSystem sys;
  sys.tau_rank = tau_rank;
  for (const CellSample& s : samples) {
    if (!(s.weight > 0.0)) continue;
    const Vec4 a(s.n.x(), s.n.y(), s.n.z(), 1.0);
    const double b = s.n.dot(s.foot.position);
    sys.normal += s.weight * a * a.transpose();
    sys.rhs += s.weight * b * a;
    sys.constant += s.weight * b * b;
  }
  const Eigen::SelfAdjointEigenSolver<Mat4> es(sys.normal);
  for (int k = 0; k < 4; ++k) {
    sys.singular_values[k] = std::sqrt(std::max(0.0, es.eigenvalues()[3 - k]));
    sys.singular_vectors.col(k) = es.eigenvectors().col(3 - k);
  }
  sys.label = classify_case(sys.singular_values, tau_rank);

  if (sys.label == SqemCase::Line) {
    const Vec3 s = sys.singular_vectors.col(3).head<3>();
    if (s.norm() > 1e-12) sys.direction = s.normalized();
  } else if (sys.label == SqemCase::Plane) {
    const Vec3 n = sys.singular_vectors.col(2).head<3>().cross(sys.singular_vectors.col(3).head<3>());
    if (n.norm() > 1e-12) sys.plane_normal = n.normalized();
  }
  const int rank = rank_of(sys.singular_values, tau_rank);
  if (rank > 0) sys.residual = quadratic(sys, range_solution(sys, rank));
  return sys;
}

SqemSystem assemble_sqem(const PowerCell& cell, double tau_rank) { return assemble_sqem(cell.samples, tau_rank); }

double sqem_energy(const SqemSystem& system, const Sphere& sphere) { return quadratic(system, as_vec4(sphere)); }

Sphere solve_sqem(const SqemSystem& system, const Sphere& current) {
  const int rank = rank_of(system.singular_values, system.tau_rank);
  if (rank < 2) throw SqemError("SQEM system is under-determined");
  Vec4 m = range_solution(system, rank);
  const Vec4 cur = as_vec4(current);
  for (int k = rank; k < 4; ++k) {
    const Vec4 u = system.singular_vectors.col(k);
    m += u.dot(cur) * u;
  }
  Sphere out = current;
  out.center = m.head<3>();
  out.radius = std::max(0.0, m[3]);
  return out;
}

// ---------------------------------------------------------------------------
// Shrinking

ShrinkResult shrink_sphere(const SurfacePoint& pin, const ClosestPointFn& closest, double bbox_diag) {
  constexpr int kMaxIterations = 30;
  const double tol = 1e-7 * bbox_diag;
  const Vec3& p = pin.position;
  const Vec3& n = pin.normal;
  ShrinkResult res;
  double r = 0.5 * bbox_diag;
  res.tangent = pin;
  for (int it = 1; it <= kMaxIterations; ++it) {
    res.iterations = it;
    const Vec3 center = p - r * n;
    const SurfacePoint q = closest(center);
    const double d = (q.position - center).norm();
    if (d >= r - tol) {
      res.converged = true;
      if ((q.position - p).norm() > tol) res.tangent = q;
      break;
    }
    res.tangent = q;
    const Vec3 pq = p - q.position;
    const double denom = 2.0 * pq.dot(n);
    if (!(denom > 0.0)) {
      r = 0.0;
      break;
    }
    const double next = pq.squaredNorm() / denom;
    if (std::abs(next - r) <= tol) {
      r = next;
      res.converged = true;
      break;
    }
    r = next;
  }
  res.sphere.center = p - r * n;
  res.sphere.radius = r;
  res.sphere.klass = res.converged ? SphereClass::unknown : SphereClass::T1_spike;
  return res;
}

ShrinkResult shrink_sphere(const SurfacePoint& pin, const ClosestPointIndex& surface, double bbox_diag) {
  return shrink_sphere(pin, as_oracle(surface), bbox_diag);
}

// ---------------------------------------------------------------------------
// Tangent refinement

SurfaceRings::SurfaceRings(const TetDomain& domain) : tris_(domain.boundary_tris), patch_(domain.tri_patch) {
  vertex_tris_.resize(domain.vertices.size());
  for (int t = 0; t < static_cast<int>(tris_.size()); ++t)
    for (int v : tris_[t]) vertex_tris_[v].push_back(t);
}

std::vector<int> SurfaceRings::one_ring(std::span<const int> tris) const {
  std::vector<int> out(tris.begin(), tris.end());
  for (int t : tris)
    for (int v : tris_[t])
      for (int u : vertex_tris_[v])
        if (patch_.empty() || patch_[u] == patch_[t]) out.push_back(u);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::vector<int>> tangent_regions(std::span<const CellSample> samples, const Clusters& clusters,
                                              const SurfaceRings& rings) {
  std::vector<std::vector<int>> regions;
  regions.reserve(clusters.size());
  for (const auto& cluster : clusters) {
    std::vector<int> seed;
    for (int i : cluster)
      if (samples[i].foot.tri >= 0) seed.push_back(samples[i].foot.tri);
    std::sort(seed.begin(), seed.end());
    seed.erase(std::unique(seed.begin(), seed.end()), seed.end());
    regions.push_back(rings.one_ring(seed));
  }
  return regions;
}

TangentResult optimize_sphere_tangents(const Sphere& sphere, const std::vector<std::vector<int>>& regions,
                                       const ClosestPointIndex& surface, double bbox_diag) {
  constexpr int kMaxIterations = 20;
  constexpr int kMaxHalvings = 12;
  TangentResult res;
  res.sphere = sphere;
  const int k = static_cast<int>(regions.size());
  if (k < 2) return res;
  for (const auto& r : regions)
    if (r.empty()) return res;

  std::vector<SurfacePoint> feet(k);
  auto evaluate = [&](const Vec4& m, std::vector<SurfacePoint>& out, double& worst) {
    double e = 0.0;
    worst = 0.0;
    for (int c = 0; c < k; ++c) {
      out[c] = *surface.closest_point_among(m.head<3>(), regions[c]);
      const double r = (out[c].position - m.head<3>()).norm() - m[3];
      e += r * r;
      worst = std::max(worst, std::abs(r));
    }
    return e;
  };

  Vec4 m = as_vec4(sphere);
  double worst = 0.0;
  double energy = evaluate(m, feet, worst);
  const double step_tol = 1e-7 * bbox_diag;
  Eigen::MatrixXd jac(k, 4);
  Eigen::VectorXd resid(k);
  std::vector<SurfacePoint> trial_feet(k);
  for (int it = 0; it < kMaxIterations; ++it) {
    res.iterations = it + 1;
    for (int c = 0; c < k; ++c) {
      Vec3 u = m.head<3>() - feet[c].position;
      const double len = u.norm();
      u = len > 0.0 ? Vec3(u / len) : Vec3(-feet[c].normal);
      jac.row(c) << u.x(), u.y(), u.z(), -1.0;
      resid[c] = len - m[3];
    }
    const Vec4 delta = jac.completeOrthogonalDecomposition().solve(-resid);
    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h, alpha *= 0.5) {
      Vec4 trial = m + alpha * delta;
      if (trial[3] < 0.0) continue;
      double trial_worst = 0.0;
      const double e = evaluate(trial, trial_feet, trial_worst);
      if (e < energy) {
        m = trial;
        energy = e;
        worst = trial_worst;
        feet.swap(trial_feet);
        accepted = true;
        break;
      }
    }
    if (!accepted || alpha * delta.norm() < step_tol) break;
  }
  res.sphere.center = m.head<3>();
  res.sphere.radius = m[3];
  res.residual = worst;
  res.ok = true;
  return res;
}

// ---------------------------------------------------------------------------
// Projection

ProjectionResult project_sphere(const Sphere& sphere, const PowerCell& cell, const RpdContext& ctx,
                                const SurfaceRings& rings, const ProjectionOptions& options) {
  ProjectionResult res;
  res.sphere = sphere;
  if (sphere.pinned || cell.samples.empty()) return res;
  const TetDomain& domain = ctx.domain();
  const double diag = domain.bbox_diag;
  const ClosestPointIndex& surface = ctx.surface();

  const SqemSystem sys = assemble_sqem(cell.samples, options.tau_rank);
  res.sqem_case = sys.label;
  const Clusters clusters = subvolume_clusters(cell, sphere.radius, domain);

  bool ok = false;
  Sphere candidate = sphere;
  if (sys.label != SqemCase::Under && clusters.size() >= 2) {
    candidate = solve_sqem(sys, sphere);
    const TangentResult t =
        optimize_sphere_tangents(candidate, tangent_regions(cell.samples, clusters, rings), surface, diag);
    if (t.ok && t.residual <= options.max_tangent_residual * diag) {
      candidate = t.sphere;
      ok = ctx.contains(candidate.center);
    }
  }
  if (!ok) {
    const auto& largest = clusters.front();
    int best = largest.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (int i : largest) {
      const double d = (cell.samples[i].foot.position - sphere.center).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    SurfacePoint pin = cell.samples[best].foot;
    pin.normal = surface.triangle_normal(pin.tri);
    candidate = shrink_sphere(pin, surface, diag).sphere;
    res.shrunk = true;
  }
  candidate.klass = sphere.klass;
  candidate.pinned = false;
  candidate.radius = surface.distance(candidate.center);
  res.sphere = candidate;
  return res;
}

}  // namespace medial
