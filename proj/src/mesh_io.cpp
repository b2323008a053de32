#include "medial/mesh_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <Eigen/Geometry>

namespace medial {

namespace {

// Local faces of a positively oriented tet, outward, opposite vertex f.
constexpr int kTetFaces[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

std::array<int, 3> sorted3(std::array<int, 3> f) {
  std::sort(f.begin(), f.end());
  return f;
}

void build_edges(TetDomain& d) {
  std::unordered_map<std::uint64_t, int> index;
  d.boundary_edges.clear();
  d.edge_tris.clear();
  std::vector<int> count;
  for (int t = 0; t < static_cast<int>(d.boundary_tris.size()); ++t) {
    const auto& tri = d.boundary_tris[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      auto [it, inserted] = index.try_emplace(edge_key(a, b), static_cast<int>(d.boundary_edges.size()));
      if (inserted) {
        d.boundary_edges.push_back({std::min(a, b), std::max(a, b)});
        d.edge_tris.push_back({t, -1});
        count.push_back(1);
      } else {
        const int e = it->second;
        if (count[e] >= 2) {
          throw MeshError(MeshErrorKind::NonManifold,
                          "boundary edge (" + std::to_string(a) + ", " + std::to_string(b) +
                              ") is shared by more than two boundary triangles (triangle " +
                              std::to_string(t) + ")");
        }
        d.edge_tris[e][1] = t;
        ++count[e];
      }
    }
  }
  for (std::size_t e = 0; e < count.size(); ++e) {
    if (count[e] != 2) {
      throw MeshError(MeshErrorKind::NonManifold,
                      "boundary edge (" + std::to_string(d.boundary_edges[e][0]) + ", " +
                          std::to_string(d.boundary_edges[e][1]) + ") has only one incident triangle");
    }
  }
}

void check_vertex_fans(const TetDomain& d) {
  // The triangles around each boundary vertex must form one edge-connected fan.
  std::vector<std::vector<int>> vtris(d.vertices.size());
  for (int t = 0; t < static_cast<int>(d.boundary_tris.size()); ++t)
    for (int v : d.boundary_tris[t]) vtris[v].push_back(t);

  std::unordered_map<std::uint64_t, int> edge_index;
  for (int e = 0; e < static_cast<int>(d.boundary_edges.size()); ++e)
    edge_index[edge_key(d.boundary_edges[e][0], d.boundary_edges[e][1])] = e;

  for (int v = 0; v < static_cast<int>(vtris.size()); ++v) {
    const auto& ts = vtris[v];
    if (ts.empty()) continue;
    std::vector<int> seen{ts.front()};
    std::vector<int> stack{ts.front()};
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      for (int w : d.boundary_tris[t]) {
        if (w == v) continue;
        const int e = edge_index.at(edge_key(v, w));
        for (int nt : d.edge_tris[e]) {
          if (std::find(seen.begin(), seen.end(), nt) == seen.end()) {
            seen.push_back(nt);
            stack.push_back(nt);
          }
        }
      }
    }
    if (seen.size() != ts.size()) {
      throw MeshError(MeshErrorKind::NonManifold,
                      "boundary vertex " + std::to_string(v) + " is non-manifold (" +
                          std::to_string(ts.size()) + " incident triangles in more than one fan)");
    }
  }
}

void check_single_component(const TetDomain& d) {
  DisjointSet ds(d.boundary_tris.size());
  for (const auto& et : d.edge_tris) ds.unite(et[0], et[1]);
  for (int t = 1; t < static_cast<int>(d.boundary_tris.size()); ++t) {
    if (ds.find(t) != ds.find(0)) {
      throw MeshError(MeshErrorKind::MultipleComponents,
                      "boundary triangle " + std::to_string(t) +
                          " is not connected to triangle 0 (multiple boundary components)");
    }
  }
  DisjointSet dv(d.vertices.size());
  for (const auto& tet : d.tets)
    for (int k = 1; k < 4; ++k) dv.unite(tet[0], tet[k]);
  for (int t = 1; t < static_cast<int>(d.tets.size()); ++t) {
    if (dv.find(d.tets[t][0]) != dv.find(d.tets[0][0])) {
      throw MeshError(MeshErrorKind::MultipleComponents,
                      "tetrahedron " + std::to_string(t) + " is not connected to tetrahedron 0");
    }
  }
}

void compute_bbox(TetDomain& d) {
  d.bbox_min = Vec3::Constant(std::numeric_limits<double>::infinity());
  d.bbox_max = -d.bbox_min;
  for (const auto& v : d.vertices) {
    d.bbox_min = d.bbox_min.cwiseMin(v);
    d.bbox_max = d.bbox_max.cwiseMax(v);
  }
  d.bbox_diag = (d.bbox_max - d.bbox_min).norm();
}

std::vector<std::string> tokenize(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  return tokens;
}

class TokenReader {
 public:
  TokenReader(std::vector<std::string> tokens, std::string file)
      : tokens_(std::move(tokens)), file_(std::move(file)) {}
  bool done() const { return pos_ >= tokens_.size(); }
  const std::string& peek() const { return tokens_.at(pos_); }
  std::string next() {
    if (done()) fail("unexpected end of file");
    return tokens_[pos_++];
  }
  long long next_int(const std::string& what) {
    const std::string tok = next();
    try {
      std::size_t used = 0;
      const long long v = std::stoll(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      fail("expected integer for " + what + ", got '" + tok + "'");
    }
  }
  double next_double(const std::string& what) {
    const std::string tok = next();
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      fail("expected number for " + what + ", got '" + tok + "'");
    }
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw MeshError(MeshErrorKind::Parse, file_ + ": " + msg);
  }

 private:
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
  std::string file_;
};

int checked_index(long long raw, std::size_t nverts, const std::string& element) {
  if (raw < 0 || raw >= static_cast<long long>(nverts)) {
    throw MeshError(MeshErrorKind::IndexOutOfRange,
                    element + " references vertex " + std::to_string(raw) + " but only " +
                        std::to_string(nverts) + " vertices exist");
  }
  return static_cast<int>(raw);
}

TetDomain load_medit(const std::filesystem::path& path, std::istream& in) {
  TokenReader r(tokenize(in), path.string());
  std::vector<Vec3> verts;
  std::vector<std::array<long long, 4>> raw_tets;
  std::vector<std::array<long long, 3>> raw_tris;
  bool has_tris = false;

  // Number of integer/real fields per entry for sections we skip.
  const std::map<std::string, int> skipped = {
      {"Edges", 3}, {"Quadrilaterals", 5}, {"Hexahedra", 9}, {"Corners", 1},
      {"Ridges", 1}, {"RequiredVertices", 1}, {"RequiredEdges", 1}, {"Normals", 3},
      {"NormalAtVertices", 2}, {"Tangents", 3}, {"TangentAtVertices", 2}, {"Prisms", 7}};

  while (!r.done()) {
    const std::string kw = r.next();
    if (kw == "MeshVersionFormatted") {
      r.next_int("MeshVersionFormatted");
    } else if (kw == "Dimension") {
      const long long dim = r.next_int("Dimension");
      if (dim != 3) r.fail("only Dimension 3 is supported, got " + std::to_string(dim));
    } else if (kw == "Vertices") {
      const long long n = r.next_int("vertex count");
      verts.reserve(static_cast<std::size_t>(n));
      for (long long i = 0; i < n; ++i) {
        Vec3 p;
        for (int k = 0; k < 3; ++k) p[k] = r.next_double("vertex " + std::to_string(i));
        r.next_int("vertex reference");
        verts.push_back(p);
      }
    } else if (kw == "Tetrahedra") {
      const long long n = r.next_int("tetrahedron count");
      for (long long i = 0; i < n; ++i) {
        std::array<long long, 4> t{};
        for (auto& v : t) v = r.next_int("tetrahedron " + std::to_string(i)) - 1;
        r.next_int("tetrahedron reference");
        raw_tets.push_back(t);
      }
    } else if (kw == "Triangles") {
      has_tris = true;
      const long long n = r.next_int("triangle count");
      for (long long i = 0; i < n; ++i) {
        std::array<long long, 3> t{};
        for (auto& v : t) v = r.next_int("triangle " + std::to_string(i)) - 1;
        r.next_int("triangle reference");
        raw_tris.push_back(t);
      }
    } else if (kw == "End") {
      break;
    } else if (auto it = skipped.find(kw); it != skipped.end()) {
      const long long n = r.next_int(kw + " count");
      for (long long i = 0; i < n * it->second; ++i) r.next();
    } else {
      r.fail("unknown keyword '" + kw + "'");
    }
  }
  if (verts.empty()) r.fail("no Vertices section");
  if (raw_tets.empty()) r.fail("no Tetrahedra section");

  std::vector<std::array<int, 4>> tets(raw_tets.size());
  for (std::size_t t = 0; t < raw_tets.size(); ++t)
    for (int k = 0; k < 4; ++k)
      tets[t][k] = checked_index(raw_tets[t][k], verts.size(), "tetrahedron " + std::to_string(t));

  std::optional<std::vector<std::array<int, 3>>> tris;
  if (has_tris) {
    tris.emplace(raw_tris.size());
    for (std::size_t t = 0; t < raw_tris.size(); ++t)
      for (int k = 0; k < 3; ++k)
        (*tris)[t][k] = checked_index(raw_tris[t][k], verts.size(), "triangle " + std::to_string(t));
  }
  return build_domain(std::move(verts), std::move(tets), std::move(tris));
}

TetDomain load_vtk(const std::filesystem::path& path, std::istream& in) {
  // Header: version line, title line, ASCII, DATASET UNSTRUCTURED_GRID.
  std::string line;
  std::getline(in, line);
  if (line.rfind("# vtk DataFile", 0) != 0)
    throw MeshError(MeshErrorKind::Parse, path.string() + ": missing '# vtk DataFile' header");
  std::getline(in, line);  // title
  TokenReader r(tokenize(in), path.string());
  if (r.next() != "ASCII") r.fail("only ASCII legacy VTK files are supported");
  if (r.next() != "DATASET" || r.next() != "UNSTRUCTURED_GRID")
    r.fail("expected DATASET UNSTRUCTURED_GRID");

  std::vector<Vec3> verts;
  std::vector<std::vector<long long>> cells;
  std::vector<long long> types;
  while (!r.done()) {
    const std::string kw = r.next();
    if (kw == "POINTS") {
      const long long n = r.next_int("point count");
      r.next();  // scalar type
      for (long long i = 0; i < n; ++i) {
        Vec3 p;
        for (int k = 0; k < 3; ++k) p[k] = r.next_double("point " + std::to_string(i));
        verts.push_back(p);
      }
    } else if (kw == "CELLS") {
      const long long n = r.next_int("cell count");
      r.next_int("cell list size");
      for (long long i = 0; i < n; ++i) {
        const long long k = r.next_int("cell " + std::to_string(i) + " size");
        std::vector<long long> c(static_cast<std::size_t>(k));
        for (auto& v : c) v = r.next_int("cell " + std::to_string(i));
        cells.push_back(std::move(c));
      }
    } else if (kw == "CELL_TYPES") {
      const long long n = r.next_int("cell type count");
      for (long long i = 0; i < n; ++i) types.push_back(r.next_int("cell type"));
    } else if (kw == "CELL_DATA" || kw == "POINT_DATA") {
      break;  // attributes are ignored
    } else {
      r.fail("unknown keyword '" + kw + "'");
    }
  }
  if (types.size() != cells.size()) r.fail("CELL_TYPES count does not match CELLS count");

  std::vector<std::array<int, 4>> tets;
  std::vector<std::array<int, 3>> tris;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (types[c] == 10 && cells[c].size() == 4) {
      std::array<int, 4> t{};
      for (int k = 0; k < 4; ++k)
        t[k] = checked_index(cells[c][k], verts.size(), "tetrahedron " + std::to_string(tets.size()));
      tets.push_back(t);
    } else if (types[c] == 5 && cells[c].size() == 3) {
      std::array<int, 3> t{};
      for (int k = 0; k < 3; ++k)
        t[k] = checked_index(cells[c][k], verts.size(), "triangle " + std::to_string(tris.size()));
      tris.push_back(t);
    }
  }
  if (tets.empty()) r.fail("no tetrahedral cells");
  std::optional<std::vector<std::array<int, 3>>> opt_tris;
  if (!tris.empty()) opt_tris = std::move(tris);
  return build_domain(std::move(verts), std::move(tets), std::move(opt_tris));
}

}  // namespace

bool TetDomain::is_convex_sharp_edge(int edge) const {
  return std::any_of(feature_edges.begin(), feature_edges.end(), [&](const FeatureEdge& f) {
    return f.edge == edge && f.kind == Sharpness::ConvexSharp;
  });
}

TetDomain build_domain(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> tets,
                       std::optional<std::vector<std::array<int, 3>>> triangles) {
  TetDomain d;
  d.vertices = std::move(vertices);
  d.tets = std::move(tets);
  if (d.tets.empty()) throw MeshError(MeshErrorKind::Parse, "domain has no tetrahedra");

  for (int t = 0; t < static_cast<int>(d.tets.size()); ++t) {
    for (int v : d.tets[t]) checked_index(v, d.vertices.size(), "tetrahedron " + std::to_string(t));
    if (tet_volume(d, t) <= 0.0) {
      throw MeshError(MeshErrorKind::InvertedTet,
                      "tetrahedron " + std::to_string(t) + " has non-positive signed volume " +
                          std::to_string(tet_volume(d, t)));
    }
  }
  compute_bbox(d);

  // Faces incident to exactly one tet, keyed by sorted vertex triple.
  std::map<std::array<int, 3>, std::pair<int, int>> face_owner;  // -> (tet, local face)
  std::map<std::array<int, 3>, int> face_count;
  for (int t = 0; t < static_cast<int>(d.tets.size()); ++t) {
    for (int f = 0; f < 4; ++f) {
      const std::array<int, 3> face{d.tets[t][kTetFaces[f][0]], d.tets[t][kTetFaces[f][1]],
                                    d.tets[t][kTetFaces[f][2]]};
      const auto key = sorted3(face);
      const int c = ++face_count[key];
      if (c > 2) {
        throw MeshError(MeshErrorKind::NonManifold,
                        "face (" + std::to_string(key[0]) + ", " + std::to_string(key[1]) + ", " +
                            std::to_string(key[2]) + ") is shared by more than two tetrahedra (tetrahedron " +
                            std::to_string(t) + ")");
      }
      face_owner[key] = {t, f};
    }
  }

  d.tet_face_boundary.assign(d.tets.size(), {-1, -1, -1, -1});
  auto add_boundary = [&](const std::array<int, 3>& key) {
    const auto [t, f] = face_owner.at(key);
    d.tet_face_boundary[t][f] = static_cast<int>(d.boundary_tris.size());
    d.boundary_tris.push_back({d.tets[t][kTetFaces[f][0]], d.tets[t][kTetFaces[f][1]],
                               d.tets[t][kTetFaces[f][2]]});
  };

  if (triangles) {
    for (std::size_t i = 0; i < triangles->size(); ++i) {
      const auto key = sorted3((*triangles)[i]);
      const auto it = face_count.find(key);
      if (it == face_count.end() || it->second != 1) {
        throw MeshError(MeshErrorKind::NonManifold,
                        "triangle " + std::to_string(i) + " is not a face incident to exactly one tetrahedron");
      }
      add_boundary(key);
    }
    std::size_t boundary_faces = 0;
    for (const auto& [key, c] : face_count) boundary_faces += (c == 1);
    if (boundary_faces != d.boundary_tris.size()) {
      throw MeshError(MeshErrorKind::NonManifold,
                      "Triangles section lists " + std::to_string(d.boundary_tris.size()) +
                          " faces but the tetrahedra have " + std::to_string(boundary_faces) + " boundary faces");
    }
  } else {
    for (const auto& [key, c] : face_count)
      if (c == 1) add_boundary(key);
  }

  build_edges(d);
  check_vertex_fans(d);
  check_single_component(d);

  d.tri_patch.assign(d.boundary_tris.size(), 0);
  return d;
}

TetDomain load_tet_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeshError(MeshErrorKind::Io, "cannot open " + path.string());
  const auto ext = path.extension().string();
  if (ext == ".mesh") return load_medit(path, in);
  if (ext == ".vtk") return load_vtk(path, in);
  throw MeshError(MeshErrorKind::Parse, path.string() + ": unsupported extension '" + ext + "'");
}

std::pair<TetDomain, AffineTransform> normalize(const TetDomain& domain) {
  const Vec3 extent = domain.bbox_max - domain.bbox_min;
  const double longest = extent.maxCoeff();
  if (!(longest > 0.0)) throw MeshError(MeshErrorKind::DegenerateBBox, "bounding box has zero extent");

  AffineTransform xf;
  xf.scale = 1000.0 / longest;
  xf.offset = domain.bbox_min;

  TetDomain out = domain;
  for (auto& v : out.vertices) v = xf.to_normalized(v);
  compute_bbox(out);
  return {std::move(out), xf};
}

double interior_dihedral(const TetDomain& d, int edge) {
  const auto [t1, t2] = d.edge_tris[edge];
  const Vec3 n1 = triangle_normal(d, t1);
  const Vec3 n2 = triangle_normal(d, t2);
  const double turn = std::acos(std::clamp(n1.dot(n2), -1.0, 1.0));

  const auto& e = d.boundary_edges[edge];
  int far = -1;
  for (int v : d.boundary_tris[t2])
    if (v != e[0] && v != e[1]) far = v;
  const double side = n1.dot(d.vertices[far] - d.vertices[e[0]]);
  return side <= 0.0 ? std::numbers::pi - turn : std::numbers::pi + turn;
}

TetDomain detect_features(TetDomain d, double phi, const std::vector<std::array<int, 2>>& manual_edges) {
  d.feature_edges.clear();
  d.feature_corners.clear();
  d.feature_polylines.clear();

  std::unordered_map<std::uint64_t, int> edge_index;
  for (int e = 0; e < static_cast<int>(d.boundary_edges.size()); ++e)
    edge_index[edge_key(d.boundary_edges[e][0], d.boundary_edges[e][1])] = e;

  std::vector<char> convex(d.boundary_edges.size(), 0);
  if (phi > 0.0) {
    for (int e = 0; e < static_cast<int>(d.boundary_edges.size()); ++e) {
      const double a = interior_dihedral(d, e);
      if (a < std::numbers::pi - phi) {
        convex[e] = 1;
      } else if (a > std::numbers::pi + phi) {
        d.feature_edges.push_back({e, Sharpness::ConcaveSharp});
      }
    }
  }
  for (const auto& m : manual_edges) {
    const auto it = edge_index.find(edge_key(m[0], m[1]));
    if (it == edge_index.end()) {
      throw MeshError(MeshErrorKind::Parse, "manual feature edge (" + std::to_string(m[0]) + ", " +
                                                std::to_string(m[1]) + ") is not a boundary edge");
    }
    convex[it->second] = 1;
    std::erase_if(d.feature_edges, [&](const FeatureEdge& f) { return f.edge == it->second; });
  }
  for (int e = 0; e < static_cast<int>(convex.size()); ++e)
    if (convex[e]) d.feature_edges.push_back({e, Sharpness::ConvexSharp});
  std::sort(d.feature_edges.begin(), d.feature_edges.end(),
            [](const FeatureEdge& a, const FeatureEdge& b) { return a.edge < b.edge; });

  // Convex-sharp valence per vertex.
  std::vector<std::vector<int>> vedges(d.vertices.size());
  for (int e = 0; e < static_cast<int>(convex.size()); ++e) {
    if (!convex[e]) continue;
    vedges[d.boundary_edges[e][0]].push_back(e);
    vedges[d.boundary_edges[e][1]].push_back(e);
  }
  for (int v = 0; v < static_cast<int>(vedges.size()); ++v) {
    const auto valence = vedges[v].size();
    if (valence >= 3 || valence == 1) d.feature_corners.push_back(v);
  }

  // Chain convex-sharp edges into polylines broken at corners.
  std::vector<char> used(convex.size(), 0);
  auto is_corner = [&](int v) { return vedges[v].size() != 2; };
  auto walk = [&](int start_v, int start_e) {
    std::vector<int> chain{start_v};
    int v = start_v, e = start_e;
    while (true) {
      used[e] = 1;
      const int w = d.boundary_edges[e][0] == v ? d.boundary_edges[e][1] : d.boundary_edges[e][0];
      chain.push_back(w);
      if (w == start_v || is_corner(w)) break;
      int next = -1;
      for (int ne : vedges[w])
        if (!used[ne]) next = ne;
      if (next < 0) break;
      v = w;
      e = next;
    }
    return chain;
  };
  for (int v = 0; v < static_cast<int>(vedges.size()); ++v) {
    if (!is_corner(v)) continue;
    for (int e : vedges[v])
      if (!used[e]) d.feature_polylines.push_back(walk(v, e));
  }
  for (int e = 0; e < static_cast<int>(convex.size()); ++e)
    if (convex[e] && !used[e]) d.feature_polylines.push_back(walk(d.boundary_edges[e][0], e));

  // Smooth patches: triangles joined across non-convex-sharp edges.
  DisjointSet ds(d.boundary_tris.size());
  for (int e = 0; e < static_cast<int>(d.edge_tris.size()); ++e)
    if (!convex[e]) ds.unite(d.edge_tris[e][0], d.edge_tris[e][1]);
  std::unordered_map<int, int> label;
  d.tri_patch.resize(d.boundary_tris.size());
  for (int t = 0; t < static_cast<int>(d.boundary_tris.size()); ++t) {
    const auto [it, inserted] = label.try_emplace(ds.find(t), static_cast<int>(label.size()));
    d.tri_patch[t] = it->second;
  }
  return d;
}

std::vector<std::array<int, 2>> load_feature_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeshError(MeshErrorKind::Io, "cannot open " + path.string());
  std::vector<std::array<int, 2>> edges;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    int a = 0, b = 0;
    if (!(ls >> a)) continue;
    if (!(ls >> b)) {
      throw MeshError(MeshErrorKind::Parse,
                      path.string() + ":" + std::to_string(lineno) + ": expected a vertex pair");
    }
    edges.push_back({a, b});
  }
  return edges;
}

void write_medit(const TetDomain& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MeshError(MeshErrorKind::Io, "cannot write " + path.string());
  out << std::setprecision(17);
  out << "MeshVersionFormatted 1\nDimension 3\n\nVertices\n" << d.vertices.size() << '\n';
  for (const auto& v : d.vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << " 0\n";
  out << "\nTetrahedra\n" << d.tets.size() << '\n';
  for (const auto& t : d.tets) out << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << ' ' << t[3] + 1 << " 0\n";
  out << "\nTriangles\n" << d.boundary_tris.size() << '\n';
  for (const auto& t : d.boundary_tris) out << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << " 0\n";
  out << "\nEnd\n";
}

double tet_volume(const TetDomain& d, int tet) {
  const auto& t = d.tets[tet];
  const Vec3& a = d.vertices[t[0]];
  Mat3 m;
  m.col(0) = d.vertices[t[1]] - a;
  m.col(1) = d.vertices[t[2]] - a;
  m.col(2) = d.vertices[t[3]] - a;
  return m.determinant() / 6.0;
}

double domain_volume(const TetDomain& d) {
  double v = 0.0;
  for (int t = 0; t < static_cast<int>(d.tets.size()); ++t) v += tet_volume(d, t);
  return v;
}

double enclosed_volume(const TetDomain& d) {
  double v = 0.0;
  for (const auto& t : d.boundary_tris)
    v += d.vertices[t[0]].dot(d.vertices[t[1]].cross(d.vertices[t[2]])) / 6.0;
  return v;
}

double boundary_area(const TetDomain& d) {
  double a = 0.0;
  for (const auto& t : d.boundary_tris)
    a += 0.5 * (d.vertices[t[1]] - d.vertices[t[0]]).cross(d.vertices[t[2]] - d.vertices[t[0]]).norm();
  return a;
}

Vec3 triangle_normal(const TetDomain& d, int tri) {
  const auto& t = d.boundary_tris[tri];
  return (d.vertices[t[1]] - d.vertices[t[0]]).cross(d.vertices[t[2]] - d.vertices[t[0]]).normalized();
}

int boundary_euler_characteristic(const TetDomain& d) {
  std::vector<char> on_boundary(d.vertices.size(), 0);
  for (const auto& t : d.boundary_tris)
    for (int v : t) on_boundary[v] = 1;
  const int nv = static_cast<int>(std::count(on_boundary.begin(), on_boundary.end(), 1));
  return nv - static_cast<int>(d.boundary_edges.size()) + static_cast<int>(d.boundary_tris.size());
}

}  // namespace medial
