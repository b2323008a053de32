#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>

#include "CLI11.hpp"
#include "medial/mesh_io.hpp"
#include "medial/optimizer.hpp"
#include "medial/report.hpp"

namespace fs = std::filesystem;
using namespace medial;

namespace {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kMissingInput = 3,
  kUnwritableOut = 4,
  kRuntime = 5,
};

struct ExitError {
  int code;
  std::string message;
};

struct Options {
  std::string input;
  std::string features;
  std::string ma;
  std::string out = "out";
  unsigned workers = 0;
  int hd_samples = kDefaultHausdorffSamples;
  int iteration = 0;
  bool quiet = false;
  PipelineConfig config;
};

void add_pipeline_flags(CLI::App* sub, Options& o) {
  sub->add_option("--gamma", o.config.gamma, "Sampling density: spacing = bbox diagonal / gamma")
      ->capture_default_str();
  sub->add_option("--knn", o.config.knn, "Neighbours per particle")->capture_default_str();
  sub->add_option("--grad-tol", o.config.grad_tol, "Inner-loop projected gradient tolerance")
      ->capture_default_str();
  sub->add_option("--outer-tol", o.config.outer_tol, "Relative change of seam and junction count")
      ->capture_default_str();
  sub->add_option("--max-outer", o.config.max_outer, "Outer iteration cap")->capture_default_str();
}

void add_common_flags(CLI::App* sub, Options& o) {
  sub->add_option("--input", o.input, "Tetrahedral mesh (.mesh or .vtk)")->required();
  sub->add_option("--features", o.features, "Sidecar of forced sharp edges, one 'i j' pair per line");
  sub->add_option("--out", o.out, "Output directory")->capture_default_str();
  sub->add_option("--seed", o.config.seed, "Random seed")->capture_default_str();
  sub->add_option("--c-sigma", o.config.c_sigma, "Kernel width factor")->capture_default_str();
  sub->add_option("--phi-deg", o.config.phi_deg, "Feature angle in degrees")->capture_default_str();
  sub->add_option("--samples-per-cell", o.config.samples_per_cell, "Surface samples per power cell")
      ->capture_default_str();
  sub->add_option("--tau-rank", o.config.tau_rank, "Relative singular value threshold")->capture_default_str();
  sub->add_option("--workers", o.workers, "Worker threads, 0 for all cores")->capture_default_str();
  sub->add_flag("--quiet", o.quiet, "No progress output");
}

void require_file(const std::string& path, const char* what) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw ExitError{kMissingInput, std::string(what) + " not found: " + path};
}

void prepare_out(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path probe = dir / ".write_probe";
  {
    std::ofstream f(probe);
    if (ec || !f || !(f << "x") || !f.flush()) throw ExitError{kUnwritableOut, "output directory not writable: " + dir.string()};
  }
  fs::remove(probe, ec);
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream f(path);
  f << j.dump(2) << '\n';
  if (!f) throw ExitError{kUnwritableOut, "cannot write " + path.string()};
}

struct LoadedDomain {
  TetDomain domain;
  AffineTransform transform;
};

LoadedDomain load(const Options& o) {
  require_file(o.input, "input");
  if (!o.features.empty()) require_file(o.features, "feature sidecar");
  auto [domain, transform] = normalize(load_tet_mesh(o.input));
  const auto manual = o.features.empty() ? std::vector<std::array<int, 2>>{} : load_feature_sidecar(o.features);
  domain = detect_features(std::move(domain), o.config.phi_deg * std::numbers::pi / 180.0, manual);
  return {std::move(domain), transform};
}

EvaluateOptions evaluate_options(const Options& o) {
  EvaluateOptions e;
  e.c_sigma = o.config.c_sigma;
  e.samples_per_cell = o.config.samples_per_cell;
  e.tau_rank = o.config.tau_rank;
  e.seed = o.config.seed;
  e.hausdorff_samples = o.hd_samples;
  return e;
}

nlohmann::json config_snapshot(const Options& o, const char* command) {
  auto j = to_json(o.config);
  j["command"] = command;
  j["input"] = o.input;
  j["features"] = o.features;
  j["hd_samples"] = o.hd_samples;
  if (!o.ma.empty()) j["ma"] = o.ma;
  return j;
}

void write_structure(const Evaluation& ev, const AffineTransform& tf, const fs::path& out) {
  write_sheets_ply(ev.mesh, tf, out / "sheets.ply");
  write_seams_obj(ev.mesh, tf, out / "seams.obj");
  write_junctions_obj(ev.mesh, tf, out / "junctions.obj");
}

void progress(const Options& o, const std::string& line) {
  if (!o.quiet) std::cerr << line << '\n';
}

int run_compute(const Options& o) {
  const fs::path out(o.out);
  prepare_out(out);
  const auto [domain, tf] = load(o);
  write_json(out / "config.json", config_snapshot(o, "compute"));

  std::ofstream log(out / "log.jsonl");
  PipelineHooks hooks;
  hooks.on_record = [&](const OuterRecord& r) {
    log << to_json(r).dump() << '\n';
    log.flush();
    char buf[200];
    std::snprintf(buf, sizeof buf, "outer %d: E %.6g |g| %.3g spheres %zu seams %zu junctions %zu inserted %zu",
                  r.outer, r.energy, r.grad_max, r.spheres, r.seam_spheres, r.junction_spheres, r.inserted);
    progress(o, buf);
  };
  const auto t0 = std::chrono::steady_clock::now();
  const PipelineResult res = run_pipeline(domain, o.config, hooks);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_ma(res.mesh, tf, out / "medial.ma");
  const Evaluation ev = evaluate_mesh(read_ma(out / "medial.ma", tf), domain, evaluate_options(o));
  write_structure(ev, tf, out);

  auto report = to_json(ev.metrics);
  report["run"] = {
      {"outer_iterations", res.outer_iterations},
      {"converged", res.converged},
      {"sigma", res.sigma},
      {"seconds", seconds},
      {"init_pins", res.init.pins},
      {"init_merged", res.init.merged},
      {"rule_invalid_edges", res.post.prune.invalid_by_rule},
      {"pruned_edges", res.post.prune.edges_removed},
      {"pruned_faces", res.post.prune.faces_removed},
      {"pockets", res.post.thin.pockets},
      {"thinned_faces", res.post.thin.faces_removed},
      {"valid_edges_pruned", res.post.valid_edges_pruned},
  };
  write_json(out / "metrics.json", report);
  char buf[200];
  std::snprintf(buf, sizeof buf, "done in %.1f s: MSER %.4f TQ %.3f TER %d HD %.3f%%", seconds, ev.metrics.mser.ratio,
                ev.metrics.tq.avg, ev.metrics.topology.ter, ev.metrics.hd.hd_pct);
  progress(o, buf);
  return kOk;
}

int run_evaluate(const Options& o) {
  const fs::path out(o.out);
  require_file(o.ma, "medial mesh");
  prepare_out(out);
  const auto [domain, tf] = load(o);
  write_json(out / "config.json", config_snapshot(o, "evaluate"));
  const Evaluation ev = evaluate_mesh(read_ma(o.ma, tf), domain, evaluate_options(o));
  write_structure(ev, tf, out);
  write_json(out / "metrics.json", to_json(ev.metrics));
  return kOk;
}

int run_inspect(const Options& o) {
  const fs::path out(o.out);
  if (!o.ma.empty()) require_file(o.ma, "medial mesh");
  prepare_out(out);
  const auto [domain, tf] = load(o);
  write_json(out / "config.json", config_snapshot(o, "inspect"));
  Analysis analysis;
  if (!o.ma.empty()) {
    std::vector<Sphere> spheres = read_ma(o.ma, tf).spheres;
    for (auto& s : spheres) s.pinned = s.radius <= domain.eps();
    const RpdContext ctx(domain);
    analysis = analyze(spheres, ctx, o.config, static_cast<std::uint64_t>(o.iteration));
  } else {
    PipelineConfig config = o.config;
    config.max_outer = o.iteration;
    analysis = run_pipeline(domain, config).analysis;
  }
  write_cells_ply(analysis.cells, out / "cells.ply");
  write_json(out / "clusters.json", clusters_json(analysis, tf));
  progress(o, std::to_string(analysis.cells.size()) + " cells written");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Medial axis transform of tetrahedral meshes"};
  app.require_subcommand(1);
  Options o;

  auto* compute = app.add_subcommand("compute", "Optimize a medial mesh and export it with metrics");
  add_common_flags(compute, o);
  add_pipeline_flags(compute, o);
  compute->add_option("--hd-samples", o.hd_samples, "Hausdorff samples per side")->capture_default_str();

  auto* evaluate = app.add_subcommand("evaluate", "Metrics of an existing .ma against a domain");
  add_common_flags(evaluate, o);
  add_pipeline_flags(evaluate, o);
  evaluate->add_option("--ma", o.ma, "Medial mesh to evaluate")->required();
  evaluate->add_option("--hd-samples", o.hd_samples, "Hausdorff samples per side")->capture_default_str();

  auto* inspect = app.add_subcommand("inspect", "Dump power cells and clusters of one pass");
  add_common_flags(inspect, o);
  add_pipeline_flags(inspect, o);
  inspect->add_option("--ma", o.ma, "Analyze these spheres instead of running the pipeline");
  inspect->add_option("--iteration", o.iteration, "Outer iterations to run before the dump")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    set_worker_count(o.workers);
    if (*compute) return run_compute(o);
    if (*evaluate) return run_evaluate(o);
    return run_inspect(o);
  } catch (const ExitError& e) {
    std::cerr << "error: " << e.message << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}
