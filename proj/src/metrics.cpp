#include "medial/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/LU>

#include "medial/geom/poisson_disk.hpp"
#include "medial/structure.hpp"

namespace medial {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) { return static_cast<double>(splitmix(state) >> 11) * 0x1.0p-53; }

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace

QualityStats triangle_quality(const MedialMesh& mesh) {
  QualityStats stats;
  stats.per_face.assign(mesh.faces.size(), -1.0);
  std::vector<double> values;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (!mesh.faces[f].valid) continue;
    const auto& v = mesh.faces[f].v;
    const double q =
        triangle_quality(mesh.spheres[v[0]].center, mesh.spheres[v[1]].center, mesh.spheres[v[2]].center);
    stats.per_face[f] = q;
    values.push_back(q);
  }
  stats.faces = values.size();
  if (values.empty()) return stats;
  stats.avg = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  stats.p85 = percentile(values, 0.85);
  stats.p90 = percentile(values, 0.90);
  return stats;
}

long euler_characteristic(const MedialMesh& mesh) {
  return static_cast<long>(mesh.spheres.size()) - static_cast<long>(mesh.valid_edge_count()) +
         static_cast<long>(mesh.valid_face_count());
}

TopologyReport ter(const MedialMesh& mesh, const TetDomain& domain) {
  TopologyReport r;
  r.chi = euler_characteristic(mesh);
  r.expected = boundary_euler_characteristic(domain) / 2;
  r.ter = r.chi == r.expected ? 0 : 1;
  return r;
}

// ---------------------------------------------------------------------------
// Tangents and MSER

TangentRecovery recover_second_tangent(const Sphere& sphere, const ClosestPointIndex& surface,
                                       const TetDomain& domain) {
  TangentRecovery out;
  const SurfacePoint p1 = surface.closest_point(sphere.center);
  out.tangents.push_back(p1);
  const double r = (p1.position - sphere.center).norm();
  if (!(r > domain.eps())) return out;
  const double delta = cluster_distance(r);
  const double tol = 1e-6 * r;
  CellSample first;
  first.foot = p1;
  first.n = p1.normal;
  auto same = [&](int tri, const Vec3& q) {
    CellSample s;
    s.foot = {q, surface.triangle_normal(tri), tri};
    s.n = s.foot.normal;
    return same_subvolume(first, s, delta, domain.tri_patch);
  };
  const double h = kTangentShiftFraction * r;
  for (int k = 0; k <= kTangentShiftSteps; ++k) {
    const Vec3 c = sphere.center - k * h * p1.normal;
    const auto near = surface.closest_point_if(c, same);
    const auto far = surface.closest_point_if(c, [&](int tri, const Vec3& q) { return !same(tri, q); });
    if (!far) break;
    const double d_near = near ? (near->position - c).norm() : kInf;
    if ((far->position - c).norm() <= d_near + tol) {
      out.tangents.push_back(*far);
      out.steps = k;
      out.found = true;
      return out;
    }
  }
  out.steps = kTangentShiftSteps;
  return out;
}

namespace {

struct SeamCheck {
  int count = 0;
  int max_neighbor = 0;
};

SeamCheck check_seam_sphere(const MedialMesh& mesh, const std::vector<std::vector<int>>& adjacency, int s,
                            const ClosestPointIndex& surface, const SurfaceRings& rings, const TetDomain& domain,
                            double sigma) {
  SeamCheck out;
  const Sphere& me = mesh.spheres[s];
  std::vector<CellSample> tangents;
  for (int t : adjacency[s]) {
    const Sphere& other = mesh.spheres[t];
    if (is_seam_class(other.klass)) continue;
    const double len = (other.center - me.center).norm();
    double frac = 1.0;
    if (sigma > 0.0 && len > 2.0 * sigma) frac = std::ldexp(1.0, -static_cast<int>(std::ceil(std::log2(len / (2.0 * sigma)))));
    Sphere q;
    q.center = me.center + frac * (other.center - me.center);
    q.radius = me.radius + frac * (other.radius - me.radius);
    const TangentRecovery rec = recover_second_tangent(q, surface, domain);
    out.max_neighbor = std::max(out.max_neighbor, static_cast<int>(rec.tangents.size()));
    for (const auto& p : rec.tangents) {
      CellSample c;
      c.x = q.center;
      c.foot = p;
      c.n = p.normal;
      tangents.push_back(c);
    }
  }
  if (tangents.empty()) return out;
  const Clusters clusters = cluster_samples(tangents, cluster_distance(me.radius), domain.tri_patch);
  for (const auto& cluster : clusters) {
    std::vector<int> tris;
    for (int i : cluster) tris.push_back(tangents[i].foot.tri);
    std::sort(tris.begin(), tris.end());
    tris.erase(std::unique(tris.begin(), tris.end()), tris.end());
    const auto p = surface.closest_point_among(me.center, rings.one_ring(tris));
    if (p && (p->position - me.center).norm() <= 1.1 * me.radius + domain.eps()) ++out.count;
  }
  return out;
}

std::vector<std::vector<int>> valid_adjacency(const MedialMesh& mesh) {
  std::vector<std::vector<int>> adj(mesh.spheres.size());
  for (const auto& e : mesh.edges)
    if (e.valid) {
      adj[e.a].push_back(e.b);
      adj[e.b].push_back(e.a);
    }
  return adj;
}

}  // namespace

int seam_tangent_count(const MedialMesh& mesh, int sphere, const ClosestPointIndex& surface,
                       const SurfaceRings& rings, const TetDomain& domain, double sigma) {
  return check_seam_sphere(mesh, valid_adjacency(mesh), sphere, surface, rings, domain, sigma).count;
}

MserReport mser(const MedialMesh& mesh, const TetDomain& domain, const ClosestPointIndex& surface, double sigma) {
  MserReport report;
  const int n = static_cast<int>(mesh.spheres.size());
  report.tangent_counts.assign(n, -1);
  std::vector<int> targets;
  for (int i = 0; i < n; ++i) {
    const SphereClass k = mesh.spheres[i].klass;
    if (k == SphereClass::T3_seam) ++report.seam_spheres;
    if (k == SphereClass::T4_junction) ++report.junction_spheres;
    if (k == SphereClass::T3_seam || k == SphereClass::T4_junction) targets.push_back(i);
  }
  if (targets.empty()) return report;
  const SurfaceRings rings(domain);
  const auto adj = valid_adjacency(mesh);
  std::vector<char> wrong(targets.size(), 0);
  parallel_for(targets.size(), [&](std::size_t k) {
    const int s = targets[k];
    const SeamCheck c = check_seam_sphere(mesh, adj, s, surface, rings, domain, sigma);
    report.tangent_counts[s] = c.count;
    const int need = mesh.spheres[s].klass == SphereClass::T4_junction ? 4 : 3;
    wrong[k] = !(c.count >= need && c.count > c.max_neighbor);
  });
  report.misclassified = static_cast<std::size_t>(std::count(wrong.begin(), wrong.end(), 1));
  report.ratio = static_cast<double>(report.misclassified) / static_cast<double>(targets.size());
  return report;
}

// ---------------------------------------------------------------------------
// Envelope

namespace {

struct Primitive {
  int kind = 0;  // 1 sphere, 2 cone, 3 slab
  std::array<int, 3> v{-1, -1, -1};
  Eigen::AlignedBox3d box;
  double rmax = 0.0;
};

double sphere_value(const Sphere& s, const Vec3& x) { return (x - s.center).norm() - s.radius; }

double cone_value(const Sphere& a, const Sphere& b, const Vec3& x) {
  const Vec3 e = b.center - a.center;
  const double len = e.norm();
  double best = std::min(sphere_value(a, x), sphere_value(b, x));
  if (!(len > 0.0)) return best;
  const Vec3 u = e / len;
  const double k = -(b.radius - a.radius) / len;
  if (std::abs(k) >= 1.0) return best;
  const Vec3 d = x - a.center;
  const double along = d.dot(u);
  const double h = (d - along * u).norm();
  const double t = std::clamp((along - k * h / std::sqrt(1.0 - k * k)) / len, 0.0, 1.0);
  return std::min(best, (x - (a.center + t * e)).norm() - (a.radius + t * (b.radius - a.radius)));
}

double slab_value(const Sphere& a, const Sphere& b, const Sphere& c, const Vec3& x) {
  const Vec3 e1 = b.center - a.center, e2 = c.center - a.center;
  const double dr1 = b.radius - a.radius, dr2 = c.radius - a.radius;
  Eigen::Matrix2d g;
  g << e1.dot(e1), e1.dot(e2), e1.dot(e2), e2.dot(e2);
  const double det = g.determinant();
  if (!(std::abs(det) > 1e-12 * g(0, 0) * g(1, 1))) return kInf;
  const Eigen::Vector2d ab = g.inverse() * Eigen::Vector2d(-dr1, -dr2);
  const Vec3 wp = ab[0] * e1 + ab[1] * e2;
  const double wp2 = wp.squaredNorm();
  if (wp2 >= 1.0) return kInf;
  Vec3 nrm = e1.cross(e2).normalized();
  if ((x - a.center).dot(nrm) < 0.0) nrm = -nrm;
  const Vec3 w = wp + std::sqrt(1.0 - wp2) * nrm;
  Mat3 m;
  m.col(0) = e1;
  m.col(1) = e2;
  m.col(2) = w;
  const Vec3 sol = m.fullPivLu().solve(x - a.center);
  const double u = sol[0], v = sol[1], lambda = sol[2];
  if (u < 0.0 || v < 0.0 || u + v > 1.0 || lambda < 0.0) return kInf;
  return lambda - (a.radius + u * dr1 + v * dr2);
}

}  // namespace

struct Envelope::Impl {
  std::vector<Sphere> spheres;
  std::vector<Primitive> prims;
  struct Node {
    Eigen::AlignedBox3d box;
    double rmax = 0.0;
    int left = -1, right = -1, begin = 0, end = 0;
  };
  std::vector<Node> nodes;
  std::vector<int> order;

  double value(const Primitive& p, const Vec3& x) const {
    switch (p.kind) {
      case 1: return sphere_value(spheres[p.v[0]], x);
      case 2: return cone_value(spheres[p.v[0]], spheres[p.v[1]], x);
      default: return slab_value(spheres[p.v[0]], spheres[p.v[1]], spheres[p.v[2]], x);
    }
  }

  int build(int begin, int end) {
    Node node;
    node.box.setEmpty();
    for (int i = begin; i < end; ++i) {
      node.box.extend(prims[order[i]].box);
      node.rmax = std::max(node.rmax, prims[order[i]].rmax);
    }
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(node);
    if (end - begin <= 4) {
      nodes[id].begin = begin;
      nodes[id].end = end;
      return id;
    }
    int axis = 0;
    node.box.sizes().maxCoeff(&axis);
    const int mid = (begin + end) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end, [&](int a, int b) {
      const double ca = prims[a].box.center()[axis], cb = prims[b].box.center()[axis];
      return ca < cb || (ca == cb && a < b);
    });
    const int l = build(begin, mid);
    const int r = build(mid, end);
    nodes[id].left = l;
    nodes[id].right = r;
    return id;
  }
};

Envelope::Envelope(const MedialMesh& mesh) : impl_(std::make_unique<Impl>()) {
  auto& m = *impl_;
  m.spheres = mesh.spheres;
  std::vector<char> used(mesh.spheres.size(), 0);
  auto add = [&](int kind, std::array<int, 3> v) {
    Primitive p;
    p.kind = kind;
    p.v = v;
    p.box.setEmpty();
    for (int k = 0; k < kind; ++k) {
      p.box.extend(mesh.spheres[v[k]].center);
      p.rmax = std::max(p.rmax, mesh.spheres[v[k]].radius);
      used[v[k]] = 1;
    }
    m.prims.push_back(p);
  };
  for (const auto& f : mesh.faces)
    if (f.valid) add(3, f.v);
  for (const auto& e : mesh.edges)
    if (e.valid) add(2, {e.a, e.b, -1});
  for (int i = 0; i < static_cast<int>(mesh.spheres.size()); ++i) add(1, {i, -1, -1});
  m.order.resize(m.prims.size());
  std::iota(m.order.begin(), m.order.end(), 0);
  if (!m.prims.empty()) m.build(0, static_cast<int>(m.prims.size()));
}

Envelope::~Envelope() = default;
Envelope::Envelope(Envelope&&) noexcept = default;
Envelope& Envelope::operator=(Envelope&&) noexcept = default;

bool Envelope::empty() const { return impl_->prims.empty(); }

double Envelope::signed_distance(const Vec3& x) const {
  const auto& m = *impl_;
  double best = kInf;
  if (m.nodes.empty()) return best;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const auto& node = m.nodes[stack.back()];
    stack.pop_back();
    if (std::sqrt(node.box.squaredExteriorDistance(x)) - node.rmax >= best) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) best = std::min(best, m.value(m.prims[m.order[i]], x));
      continue;
    }
    const double dl = m.nodes[node.left].box.squaredExteriorDistance(x);
    const double dr = m.nodes[node.right].box.squaredExteriorDistance(x);
    if (dl < dr) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return best;
}

std::pair<Vec3, double> Envelope::random_medial_point(std::uint64_t& state) const {
  const auto& m = *impl_;
  const auto& p = m.prims[std::min(m.prims.size() - 1, static_cast<std::size_t>(uniform01(state) * m.prims.size()))];
  const auto& s = m.spheres;
  if (p.kind == 1) return {s[p.v[0]].center, s[p.v[0]].radius};
  if (p.kind == 2) {
    const double t = uniform01(state);
    return {s[p.v[0]].center + t * (s[p.v[1]].center - s[p.v[0]].center),
            s[p.v[0]].radius + t * (s[p.v[1]].radius - s[p.v[0]].radius)};
  }
  double u = uniform01(state), v = uniform01(state);
  if (u + v > 1.0) {
    u = 1.0 - u;
    v = 1.0 - v;
  }
  const Sphere &a = s[p.v[0]], &b = s[p.v[1]], &c = s[p.v[2]];
  return {a.center + u * (b.center - a.center) + v * (c.center - a.center),
          a.radius + u * (b.radius - a.radius) + v * (c.radius - a.radius)};
}

HausdorffReport hausdorff(const MedialMesh& mesh, const TetDomain& domain, const ClosestPointIndex& surface,
                          int n_samples, std::uint64_t seed) {
  constexpr int kMarchSteps = 1000;
  const Envelope env(mesh);
  if (env.empty()) throw std::invalid_argument("hausdorff: empty mesh");
  HausdorffReport out;
  const auto n = static_cast<std::size_t>(std::max(1, n_samples));

  const auto on_surface = uniform_surface_samples(domain, n, seed);
  std::vector<double> d1(on_surface.size());
  parallel_for(on_surface.size(), [&](std::size_t i) { d1[i] = std::abs(env.signed_distance(on_surface[i].position)); });

  const double tol = 1e-6 * domain.bbox_diag;
  std::vector<double> d2(n);
  parallel_for(n, [&](std::size_t i) {
    std::uint64_t state = seed * 0x100000001b3ull + i;
    splitmix(state);
    const auto [m, r] = env.random_medial_point(state);
    const double z = 2.0 * uniform01(state) - 1.0;
    const double phi = 2.0 * std::numbers::pi * uniform01(state);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec3 dir(s * std::cos(phi), s * std::sin(phi), z);
    double t = r;
    Vec3 y = m + t * dir;
    for (int step = 0; step < kMarchSteps; ++step) {
      const double f = env.signed_distance(y);
      if (f > -tol) {
        d2[i] = surface.distance(y);
        return;
      }
      t += -f;
      y = m + t * dir;
    }
    // Grazing ray: dropped.
    d2[i] = 0.0;
  });
  out.surface_to_envelope = d1.empty() ? 0.0 : *std::max_element(d1.begin(), d1.end());
  out.envelope_to_surface = *std::max_element(d2.begin(), d2.end());
  out.hd = std::max(out.surface_to_envelope, out.envelope_to_surface);
  out.hd_pct = 100.0 * out.hd / domain.bbox_diag;
  return out;
}

double mesh_sigma(const MedialMesh& mesh, double c_sigma) {
  double area = 0.0;
  for (const auto& f : mesh.faces) {
    if (!f.valid) continue;
    const Vec3& a = mesh.spheres[f.v[0]].center;
    area += 0.5 * (mesh.spheres[f.v[1]].center - a).cross(mesh.spheres[f.v[2]].center - a).norm();
  }
  if (mesh.spheres.empty() || !(area > 0.0)) return 0.0;
  return c_sigma * std::sqrt(area / static_cast<double>(mesh.spheres.size()));
}

MetricsReport compute_metrics(const MedialMesh& mesh, const TetDomain& domain, const MetricsOptions& options) {
  MetricsReport r;
  const ClosestPointIndex surface(domain);
  r.sigma = mesh_sigma(mesh, options.c_sigma);
  r.spheres = mesh.spheres.size();
  r.edges = mesh.valid_edge_count();
  r.faces = mesh.valid_face_count();
  int max_sheet = -1;
  for (const auto& f : mesh.faces)
    if (f.valid) max_sheet = std::max(max_sheet, f.sheet);
  r.sheets = static_cast<std::size_t>(max_sheet + 1);
  r.seams = mesh.seams.size();
  r.junctions = mesh.junctions.size();
  r.spikes = static_cast<std::size_t>(std::count_if(mesh.spheres.begin(), mesh.spheres.end(),
                                                    [](const Sphere& s) { return s.klass == SphereClass::T1_spike; }));
  r.tq = triangle_quality(mesh);
  r.topology = ter(mesh, domain);
  r.mser = mser(mesh, domain, surface, r.sigma);
  if (options.hausdorff_samples > 0) r.hd = hausdorff(mesh, domain, surface, options.hausdorff_samples, options.seed);
  return r;
}

}  // namespace medial
