#include "medial/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "medial/structure.hpp"

namespace medial {

namespace {

void append(std::string& out, const char* fmt, auto... args) {
  char buf[256];
  const int n = std::snprintf(buf, sizeof buf, fmt, args...);
  out.append(buf, static_cast<std::size_t>(n));
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MeshError(MeshErrorKind::Io, "cannot write " + path.string());
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw MeshError(MeshErrorKind::Io, "write failed: " + path.string());
}

std::array<int, 3> sheet_color(int sheet) {
  if (sheet < 0) return {128, 128, 128};
  std::uint64_t z = static_cast<std::uint64_t>(sheet) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return {static_cast<int>(64 + (z & 0xbf)), static_cast<int>(64 + ((z >> 8) & 0xbf)),
          static_cast<int>(64 + ((z >> 16) & 0xbf))};
}

}  // namespace

std::string format_ma(const MedialMesh& mesh, const AffineTransform& transform) {
  std::string out;
  append(out, "%zu %zu %zu\n", mesh.spheres.size(), mesh.valid_edge_count(), mesh.valid_face_count());
  for (const auto& s : mesh.spheres) {
    const Vec3 c = transform.to_input(s.center);
    append(out, "v %.17g %.17g %.17g %.17g\n", c.x(), c.y(), c.z(), transform.length_to_input(s.radius));
  }
  for (const auto& e : mesh.edges)
    if (e.valid) append(out, "e %d %d\n", e.a, e.b);
  for (const auto& f : mesh.faces)
    if (f.valid) append(out, "f %d %d %d\n", f.v[0], f.v[1], f.v[2]);
  return out;
}

void write_ma(const MedialMesh& mesh, const AffineTransform& transform, const std::filesystem::path& path) {
  write_text(path, format_ma(mesh, transform));
}

MedialMesh read_ma(const std::filesystem::path& path, const AffineTransform& transform) {
  std::ifstream in(path);
  if (!in) throw MeshError(MeshErrorKind::Io, "cannot open " + path.string());
  const auto fail = [&](const std::string& what) {
    throw MeshError(MeshErrorKind::Parse, path.string() + ": " + what);
  };
  std::size_t nv = 0, ne = 0, nf = 0;
  if (!(in >> nv >> ne >> nf)) fail("bad header");
  MedialMesh m;
  m.spheres.reserve(nv);
  std::string tag;
  for (std::size_t i = 0; i < nv; ++i) {
    double x, y, z, r;
    if (!(in >> tag >> x >> y >> z >> r) || tag != "v") fail("bad vertex line " + std::to_string(i));
    Sphere s;
    s.center = transform.to_normalized(Vec3(x, y, z));
    s.radius = transform.length_to_normalized(r);
    m.spheres.push_back(s);
  }
  const auto check = [&](long v) {
    if (v < 0 || v >= static_cast<long>(nv)) fail("index out of range");
    return static_cast<int>(v);
  };
  for (std::size_t i = 0; i < ne; ++i) {
    long a, b;
    if (!(in >> tag >> a >> b) || tag != "e") fail("bad edge line " + std::to_string(i));
    int ia = check(a), ib = check(b);
    if (ia > ib) std::swap(ia, ib);
    m.edges.push_back(MedialEdge{ia, ib, true});
  }
  for (std::size_t i = 0; i < nf; ++i) {
    long a, b, c;
    if (!(in >> tag >> a >> b >> c) || tag != "f") fail("bad face line " + std::to_string(i));
    std::array<int, 3> v{check(a), check(b), check(c)};
    std::sort(v.begin(), v.end());
    m.faces.push_back(MedialFace{v, true, -1});
  }
  const auto edge_key = [](const MedialEdge& e) { return std::make_pair(e.a, e.b); };
  std::sort(m.edges.begin(), m.edges.end(), [&](const auto& x, const auto& y) { return edge_key(x) < edge_key(y); });
  m.edges.erase(std::unique(m.edges.begin(), m.edges.end(),
                            [&](const auto& x, const auto& y) { return edge_key(x) == edge_key(y); }),
                m.edges.end());
  std::sort(m.faces.begin(), m.faces.end(), [](const auto& x, const auto& y) { return x.v < y.v; });
  m.faces.erase(std::unique(m.faces.begin(), m.faces.end(), [](const auto& x, const auto& y) { return x.v == y.v; }),
                m.faces.end());
  return m;
}

Evaluation evaluate_mesh(MedialMesh mesh, const TetDomain& domain, const EvaluateOptions& options) {
  const RpdContext ctx(domain);
  auto cells = compute_rpd(ctx, mesh.spheres);
  SamplingOptions so;
  so.samples_per_cell = options.samples_per_cell;
  sample_cells(cells, ctx.surface(), so, options.seed);
  const std::size_t n = mesh.spheres.size();
  std::vector<std::size_t> counts(n, 0);
  parallel_for(n, [&](std::size_t i) {
    if (!cells[i].samples.empty()) counts[i] = subvolume_clusters(cells[i], mesh.spheres[i].radius, domain).size();
  });
  const double eps = domain.eps();
  for (std::size_t i = 0; i < n; ++i) {
    Sphere& s = mesh.spheres[i];
    s.pinned = false;
    if (s.radius <= eps)
      s.klass = counts[i] >= 3 ? SphereClass::T1_3_corner : SphereClass::T1_2_feature_edge;
    else
      s.klass = classify_sphere(counts[i], s);
  }
  Evaluation ev;
  ev.mesh = extract_structure(std::move(mesh));
  MetricsOptions mo;
  mo.c_sigma = options.c_sigma;
  mo.hausdorff_samples = options.hausdorff_samples;
  mo.seed = options.seed;
  ev.metrics = compute_metrics(ev.mesh, domain, mo);
  return ev;
}

void write_sheets_ply(const MedialMesh& mesh, const AffineTransform& transform, const std::filesystem::path& path) {
  std::string out;
  append(out, "ply\nformat ascii 1.0\nelement vertex %zu\n", mesh.spheres.size());
  out += "property double x\nproperty double y\nproperty double z\nproperty double radius\n";
  append(out, "element face %zu\n", mesh.valid_face_count());
  out += "property list uchar int vertex_indices\nproperty int sheet\n";
  out += "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  for (const auto& s : mesh.spheres) {
    const Vec3 c = transform.to_input(s.center);
    append(out, "%.17g %.17g %.17g %.17g\n", c.x(), c.y(), c.z(), transform.length_to_input(s.radius));
  }
  for (const auto& f : mesh.faces) {
    if (!f.valid) continue;
    const auto rgb = sheet_color(f.sheet);
    append(out, "3 %d %d %d %d %d %d %d\n", f.v[0], f.v[1], f.v[2], f.sheet, rgb[0], rgb[1], rgb[2]);
  }
  write_text(path, out);
}

void write_seams_obj(const MedialMesh& mesh, const AffineTransform& transform, const std::filesystem::path& path) {
  std::string out;
  int next = 1;
  for (const auto& chain : mesh.seams) {
    for (int v : chain) {
      const Vec3 c = transform.to_input(mesh.spheres[v].center);
      append(out, "v %.17g %.17g %.17g\n", c.x(), c.y(), c.z());
    }
    out += "l";
    for (std::size_t k = 0; k < chain.size(); ++k) append(out, " %d", next + static_cast<int>(k));
    out += "\n";
    next += static_cast<int>(chain.size());
  }
  write_text(path, out);
}

void write_junctions_obj(const MedialMesh& mesh, const AffineTransform& transform,
                         const std::filesystem::path& path) {
  std::string out;
  for (int v : mesh.junctions) {
    const Vec3 c = transform.to_input(mesh.spheres[v].center);
    append(out, "v %.17g %.17g %.17g\n", c.x(), c.y(), c.z());
  }
  if (!mesh.junctions.empty()) {
    out += "p";
    for (std::size_t k = 0; k < mesh.junctions.size(); ++k) append(out, " %zu", k + 1);
    out += "\n";
  }
  write_text(path, out);
}

nlohmann::json to_json(const MetricsReport& r) {
  return {
      {"mser", r.mser.ratio},
      {"tq_avg", r.tq.avg},
      {"tq_p85", r.tq.p85},
      {"tq_p90", r.tq.p90},
      {"ter", r.topology.ter},
      {"chi", r.topology.chi},
      {"expected_chi", r.topology.expected},
      {"hd_pct", r.hd.hd_pct},
      {"hd_surface_to_envelope", r.hd.surface_to_envelope},
      {"hd_envelope_to_surface", r.hd.envelope_to_surface},
      {"sigma", r.sigma},
      {"counts",
       {{"spheres", r.spheres},
        {"edges", r.edges},
        {"faces", r.faces},
        {"sheets", r.sheets},
        {"seams", r.seams},
        {"junctions", r.junctions},
        {"spikes", r.spikes},
        {"seam_spheres", r.mser.seam_spheres},
        {"junction_spheres", r.mser.junction_spheres},
        {"misclassified", r.mser.misclassified}}},
  };
}

nlohmann::json to_json(const PipelineConfig& c) {
  return {
      {"gamma", c.gamma},
      {"c_sigma", c.c_sigma},
      {"phi_deg", c.phi_deg},
      {"knn", c.knn},
      {"grad_tol", c.grad_tol},
      {"outer_tol", c.outer_tol},
      {"max_outer", c.max_outer},
      {"seed", c.seed},
      {"samples_per_cell", c.samples_per_cell},
      {"tau_rank", c.tau_rank},
      {"lbfgs_memory", c.lbfgs_memory},
      {"max_inner", c.max_inner},
      {"knn_per_evaluation", c.knn_per_evaluation},
      {"insertion_cap", c.insertion_cap},
  };
}

nlohmann::json to_json(const OuterRecord& r) {
  return {
      {"outer", r.outer},
      {"energy", r.energy},
      {"grad_max", r.grad_max},
      {"inner_iterations", r.inner_iterations},
      {"line_search_failed", r.line_search_failed},
      {"spheres", r.spheres},
      {"seam_spheres", r.seam_spheres},
      {"junction_spheres", r.junction_spheres},
      {"inserted", r.inserted},
      {"shrunk", r.shrunk},
      {"change_ratio", r.change_ratio},
  };
}

nlohmann::json clusters_json(const Analysis& analysis, const AffineTransform& transform) {
  auto out = nlohmann::json::array();
  const auto& spheres = analysis.mesh.spheres;
  for (std::size_t i = 0; i < spheres.size(); ++i) {
    const Vec3 c = transform.to_input(spheres[i].center);
    std::vector<std::size_t> sizes;
    if (i < analysis.clusters.size())
      for (const auto& cl : analysis.clusters[i]) sizes.push_back(cl.size());
    out.push_back({
        {"id", i},
        {"center", {c.x(), c.y(), c.z()}},
        {"radius", transform.length_to_input(spheres[i].radius)},
        {"class", std::string(to_string(spheres[i].klass))},
        {"pinned", spheres[i].pinned},
        {"samples", i < analysis.cells.size() ? analysis.cells[i].samples.size() : 0},
        {"clusters", sizes},
        {"sqem_case",
         std::string(i < analysis.systems.size() ? to_string(analysis.systems[i].label) : "UNDER")},
    });
  }
  return out;
}

}  // namespace medial
