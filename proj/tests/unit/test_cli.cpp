#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kFixtures = MEDIAL_FIXTURE_DIR;

int run(const std::string& args) {
  const std::string cmd = std::string(MEDIAL_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "medial_test_cli" / name;
  fs::remove_all(dir);
  return dir;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run("--help") == 0);
  CHECK(run("") == 2);
  CHECK(run("compute --input " + kFixtures + "/cube.mesh --bogus") == 2);
  CHECK(run("compute") == 2);
  CHECK(run("compute --input /nonexistent/shape.mesh --out " + scratch("missing").string()) == 3);
  CHECK(run("evaluate --input " + kFixtures + "/slab.mesh --ma /nonexistent.ma --out " + scratch("m2").string()) ==
        3);

  const fs::path blocker = scratch("blocker");
  fs::create_directories(blocker.parent_path());
  std::ofstream(blocker) << "file";
  CHECK(run("compute --input " + kFixtures + "/cube.mesh --out " + (blocker / "sub").string()) == 4);

  const fs::path bad = scratch("bad.ma");
  std::ofstream(bad) << "3 0 0\nv 0 0 0\n";
  CHECK(run("evaluate --input " + kFixtures + "/slab.mesh --ma " + bad.string() + " --out " +
            scratch("bad_out").string()) == 5);
}

TEST_CASE("evaluate on the slab fixture") {
  const fs::path out = scratch("slab");
  REQUIRE(run("evaluate --input " + kFixtures + "/slab.mesh --ma " + kFixtures +
              "/slab.ma --hd-samples 2000 --out " + out.string()) == 0);
  const auto m = read_json(out / "metrics.json");
  CHECK(m["ter"] == 0);
  CHECK(m["chi"] == 1);
  CHECK(fs::exists(out / "config.json"));
  CHECK(fs::exists(out / "sheets.ply"));
}

TEST_CASE("compute output evaluates to the same metrics") {
  const fs::path out = scratch("cube"), again = scratch("cube_eval");
  const std::string common = " --input " + kFixtures + "/cube.mesh --gamma 16 --hd-samples 2000 --seed 3";
  REQUIRE(run("compute" + common + " --max-outer 2 --out " + out.string()) == 0);
  for (const char* f : {"medial.ma", "sheets.ply", "seams.obj", "junctions.obj", "metrics.json", "log.jsonl",
                        "config.json"})
    CHECK(fs::exists(out / f));
  CHECK(read_json(out / "config.json")["gamma"] == 16.0);
  CHECK(!slurp(out / "log.jsonl").empty());

  REQUIRE(run("evaluate" + common + " --ma " + (out / "medial.ma").string() + " --out " + again.string()) == 0);
  auto computed = read_json(out / "metrics.json");
  computed.erase("run");
  CHECK(computed == read_json(again / "metrics.json"));
  CHECK(slurp(out / "sheets.ply") == slurp(again / "sheets.ply"));
}

TEST_CASE("inspect dumps cells and clusters") {
  const fs::path out = scratch("inspect");
  REQUIRE(run("inspect --input " + kFixtures + "/cube.mesh --gamma 10 --out " + out.string()) == 0);
  const auto clusters = read_json(out / "clusters.json");
  CHECK(clusters.is_array());
  CHECK(!clusters.empty());
  CHECK(fs::file_size(out / "cells.ply") > 0);
}
