#include "medial/structure.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "medial/metrics.hpp"

namespace medial {

bool is_seam_class(SphereClass klass) {
  return klass == SphereClass::T3_seam || klass == SphereClass::T4_junction || klass == SphereClass::T1_3_corner;
}

SphereClass classify_sphere(std::size_t cluster_count, const Sphere& sphere) {
  if (sphere.pinned &&
      (sphere.klass == SphereClass::T1_2_feature_edge || sphere.klass == SphereClass::T1_3_corner))
    return sphere.klass;
  if (cluster_count >= 4) return SphereClass::T4_junction;
  if (cluster_count == 3) return SphereClass::T3_seam;
  if (cluster_count == 2) return SphereClass::T2_sheet;
  return SphereClass::T1_spike;
}

SphereClass classify_sphere(const PowerCell&, const Clusters& clusters, const Sphere& sphere) {
  return classify_sphere(clusters.size(), sphere);
}

namespace {

bool clusters_touch(std::span<const CellSample> a, const std::vector<int>& ia, std::span<const CellSample> b,
                    const std::vector<int>& ib, double delta, const std::vector<int>& tri_patch) {
  for (int i : ia)
    for (int j : ib)
      if (same_subvolume(a[i], b[j], delta, tri_patch)) return true;
  return false;
}

bool covered(std::span<const CellSample> a, const Clusters& ca, std::span<const CellSample> b, const Clusters& cb,
             double delta, const std::vector<int>& tri_patch) {
  for (const auto& x : ca) {
    bool hit = false;
    for (const auto& y : cb)
      if (clusters_touch(a, x, b, y, delta, tri_patch)) {
        hit = true;
        break;
      }
    if (!hit) return false;
  }
  return true;
}

}  // namespace

bool same_subvolume_sets(std::span<const CellSample> a, const Clusters& ca, std::span<const CellSample> b,
                         const Clusters& cb, double delta, const std::vector<int>& tri_patch) {
  return covered(a, ca, b, cb, delta, tri_patch) && covered(b, cb, a, ca, delta, tri_patch);
}

std::vector<char> edge_rule_validity(const MedialMesh& mesh, std::span<const PowerCell> cells,
                                     std::span<const Clusters> clusters, const TetDomain& domain) {
  std::vector<char> valid(mesh.edges.size(), 1);
  parallel_for(mesh.edges.size(), [&](std::size_t e) {
    const int i = mesh.edges[e].a, j = mesh.edges[e].b;
    const BisectorFace* face = cells[i].face_with(j);
    if (face == nullptr) face = cells[j].face_with(i);
    if (face == nullptr || face->samples.empty()) return;
    bool ok = false;
    for (int end : {i, j}) {
      if (cells[end].samples.empty()) continue;
      const double delta = cluster_distance(mesh.spheres[end].radius);
      const Clusters fc = cluster_samples(face->samples, delta, domain.tri_patch);
      if (same_subvolume_sets(face->samples, fc, cells[end].samples, clusters[end], delta, domain.tri_patch)) {
        ok = true;
        break;
      }
    }
    valid[e] = ok;
  });
  return valid;
}

MedialMesh prune_invalid(MedialMesh mesh, std::span<const PowerCell> cells, std::span<const Clusters> clusters,
                         const TetDomain& domain) {
  const std::vector<char> rule = edge_rule_validity(mesh, cells, clusters, domain);
  for (std::size_t e = 0; e < mesh.edges.size(); ++e)
    if (!rule[e]) mesh.edges[e].valid = false;
  for (auto& f : mesh.faces) {
    const auto& v = f.v;
    for (auto [a, b] : {std::pair{v[0], v[1]}, std::pair{v[0], v[2]}, std::pair{v[1], v[2]}}) {
      const int e = mesh.find_edge(a, b);
      if (e < 0 || !mesh.edges[e].valid) f.valid = false;
    }
  }
  return mesh;
}

namespace {

std::array<int, 3> face_edges(const MedialMesh& mesh, const MedialFace& f) {
  return {mesh.find_edge(f.v[0], f.v[1]), mesh.find_edge(f.v[0], f.v[2]), mesh.find_edge(f.v[1], f.v[2])};
}

}  // namespace

PruneStats collapse_invalid(MedialMesh& mesh, const std::vector<char>& rule_valid) {
  PruneStats stats;
  std::vector<std::vector<int>> edge_faces(mesh.edges.size());
  for (int f = 0; f < static_cast<int>(mesh.faces.size()); ++f) {
    if (!mesh.faces[f].valid) continue;
    for (int e : face_edges(mesh, mesh.faces[f]))
      if (e >= 0) edge_faces[e].push_back(f);
  }
  for (std::size_t e = 0; e < mesh.edges.size(); ++e)
    if (mesh.edges[e].valid && !rule_valid[e]) ++stats.invalid_by_rule;

  auto live_faces = [&](int e) {
    int count = 0, last = -1;
    for (int f : edge_faces[e])
      if (mesh.faces[f].valid) {
        ++count;
        last = f;
      }
    return std::pair{count, last};
  };
  std::vector<int> work;
  for (int e = 0; e < static_cast<int>(mesh.edges.size()); ++e)
    if (mesh.edges[e].valid && !rule_valid[e]) work.push_back(e);
  while (!work.empty()) {
    std::vector<int> next;
    for (int e : work) {
      if (!mesh.edges[e].valid) continue;
      const auto [count, f] = live_faces(e);
      if (count != 1) continue;
      mesh.edges[e].valid = false;
      mesh.faces[f].valid = false;
      ++stats.edges_removed;
      ++stats.faces_removed;
      for (int other : face_edges(mesh, mesh.faces[f]))
        if (other >= 0 && other != e && mesh.edges[other].valid && !rule_valid[other]) next.push_back(other);
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    work = std::move(next);
  }
  return stats;
}

std::vector<std::array<int, 4>> find_pockets(const MedialMesh& mesh) {
  std::map<std::pair<int, int>, std::vector<int>> third;
  for (const auto& f : mesh.faces) {
    if (!f.valid) continue;
    third[{f.v[0], f.v[1]}].push_back(f.v[2]);
  }
  auto valid_face = [&](int a, int b, int c) {
    const int f = mesh.find_face(a, b, c);
    return f >= 0 && mesh.faces[f].valid;
  };
  std::vector<std::array<int, 4>> out;
  for (const auto& [ab, cs] : third)
    for (std::size_t x = 0; x < cs.size(); ++x)
      for (std::size_t y = 0; y < cs.size(); ++y) {
        const int c = cs[x], d = cs[y];
        if (d <= c) continue;
        if (valid_face(ab.first, c, d) && valid_face(ab.second, c, d)) out.push_back({ab.first, ab.second, c, d});
      }
  std::sort(out.begin(), out.end());
  return out;
}

ThinStats enforce_thinness(MedialMesh& mesh, const std::vector<char>* rule_valid) {
  ThinStats stats;
  const auto pockets = find_pockets(mesh);
  stats.pockets = pockets.size();
  if (pockets.empty()) return stats;

  std::vector<std::array<int, 4>> pocket_faces(pockets.size());
  std::map<int, std::vector<int>> face_pockets;
  for (int p = 0; p < static_cast<int>(pockets.size()); ++p) {
    const auto& q = pockets[p];
    pocket_faces[p] = {mesh.find_face(q[0], q[1], q[2]), mesh.find_face(q[0], q[1], q[3]),
                       mesh.find_face(q[0], q[2], q[3]), mesh.find_face(q[1], q[2], q[3])};
    for (int f : pocket_faces[p]) face_pockets[f].push_back(p);
  }
  std::vector<char> alive(pockets.size(), 1);
  std::size_t remaining = pockets.size();

  auto quality = [&](int f) {
    const auto& v = mesh.faces[f].v;
    return triangle_quality(mesh.spheres[v[0]].center, mesh.spheres[v[1]].center, mesh.spheres[v[2]].center);
  };
  auto has_invalid_edge = [&](int f) {
    if (rule_valid == nullptr) return false;
    for (int e : face_edges(mesh, mesh.faces[f]))
      if (e >= 0 && !(*rule_valid)[e]) return true;
    return false;
  };

  while (remaining > 0) {
    int best = -1;
    std::tuple<int, int, double, int> best_key{};
    for (const auto& [f, ps] : face_pockets) {
      if (!mesh.faces[f].valid) continue;
      int live = 0;
      for (int p : ps) live += alive[p];
      if (live == 0) continue;
      const std::tuple<int, int, double, int> key{live == 1 ? 0 : 1, has_invalid_edge(f) ? 0 : 1, quality(f), f};
      if (best < 0 || key < best_key) {
        best = f;
        best_key = key;
      }
    }
    if (best < 0) break;
    if (std::get<0>(best_key) != 0) ++stats.forced;
    mesh.faces[best].valid = false;
    ++stats.faces_removed;
    for (int p : face_pockets[best])
      if (alive[p]) {
        alive[p] = 0;
        --remaining;
      }
  }
  return stats;
}

MedialMesh extract_structure(MedialMesh mesh) {
  const int n = static_cast<int>(mesh.spheres.size());
  auto seam_edge = [&](const MedialEdge& e) {
    return e.valid && is_seam_class(mesh.spheres[e.a].klass) && is_seam_class(mesh.spheres[e.b].klass);
  };

  // Sheets: faces glued across valid non-seam edges.
  const int nf = static_cast<int>(mesh.faces.size());
  std::vector<int> parent(nf);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<int> edge_first_face(mesh.edges.size(), -1);
  for (int f = 0; f < nf; ++f) {
    if (!mesh.faces[f].valid) continue;
    for (int e : face_edges(mesh, mesh.faces[f])) {
      if (e < 0 || !mesh.edges[e].valid || seam_edge(mesh.edges[e])) continue;
      if (edge_first_face[e] < 0) {
        edge_first_face[e] = f;
      } else {
        const int a = find(f), b = find(edge_first_face[e]);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<int> sheet_of_root(nf, -1);
  int sheets = 0;
  for (int f = 0; f < nf; ++f) {
    if (!mesh.faces[f].valid) {
      mesh.faces[f].sheet = -1;
      continue;
    }
    const int r = find(f);
    if (sheet_of_root[r] < 0) sheet_of_root[r] = sheets++;
    mesh.faces[f].sheet = sheet_of_root[r];
  }

  // Seam graph.
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : mesh.edges)
    if (seam_edge(e)) {
      adj[e.a].push_back(e.b);
      adj[e.b].push_back(e.a);
    }
  mesh.junctions.clear();
  std::vector<char> stop(n, 0);
  for (int v = 0; v < n; ++v) {
    const bool junction = mesh.spheres[v].klass == SphereClass::T4_junction || adj[v].size() >= 3;
    if (junction) mesh.junctions.push_back(v);
    stop[v] = junction || mesh.spheres[v].klass == SphereClass::T1_3_corner || adj[v].size() != 2;
  }

  mesh.seams.clear();
  std::set<std::pair<int, int>> used;
  auto walk = [&](int start, int next) {
    std::vector<int> chain{start};
    int prev = start, cur = next;
    used.insert({std::min(start, next), std::max(start, next)});
    while (true) {
      chain.push_back(cur);
      if (stop[cur] || cur == start) break;
      int step = -1;
      for (int w : adj[cur])
        if (w != prev && !used.count({std::min(cur, w), std::max(cur, w)})) {
          step = w;
          break;
        }
      if (step < 0) break;
      used.insert({std::min(cur, step), std::max(cur, step)});
      prev = cur;
      cur = step;
    }
    return chain;
  };
  for (int v = 0; v < n; ++v) {
    if (!stop[v]) continue;
    for (int w : adj[v])
      if (!used.count({std::min(v, w), std::max(v, w)})) mesh.seams.push_back(walk(v, w));
  }
  for (int v = 0; v < n; ++v)
    for (int w : adj[v])
      if (!used.count({std::min(v, w), std::max(v, w)})) mesh.seams.push_back(walk(v, w));
  return mesh;
}

}  // namespace medial
