#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "philap/config.hpp"

using namespace philap;
namespace fs = std::filesystem;

#ifndef PHILAP_CLI_PATH
#define PHILAP_CLI_PATH "philap"
#endif

namespace {

fs::path scratch_root() {
  static const fs::path root = [] {
    const fs::path p = fs::temp_directory_path() / "philap-cli-tests";
    std::error_code ec;
    fs::remove_all(p, ec);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path p = scratch_root() / name;
  std::ofstream out(p);
  out << body;
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string("\"") + PHILAP_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  if (st == -1) return -1;
  return WIFEXITED(st) ? WEXITSTATUS(st) : -2;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const char* kGoodConfig = R"({
  "seed": 11,
  "kernel": {"family": "power", "p": 2},
  "mesh": {"dim": 1, "cells": 40},
  "system": {
    "structure": "cooperative",
    "alpha": [0.5, 0.5],
    "sigma": [0.1, 0.1],
    "a": ["1", "1"],
    "b": ["1", "1"]
  },
  "solver": {"schedule": [0.5, 0.25], "eps": 1.0},
  "experiments": ["nfunction-audit", "solve", "continuation", "comparison",
                  "barrier"]
})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing applies defaults and validates blocks") {
  const RunConfig cfg = parse_config(kGoodConfig);
  CHECK(cfg.seed == 11u);
  CHECK(cfg.kernel.family == "power");
  CHECK(cfg.mesh.cells == 40);
  CHECK(cfg.structure == "cooperative");
  CHECK(cfg.alpha[0] == 0.5);
  CHECK(cfg.beta[0] == 0.0);  // defaulted
  CHECK(cfg.schedule.size() == 2);
  CHECK(cfg.experiments.size() == 5);
  CHECK(cfg.output_dir == "out");
  CHECK(cfg.comparison.f == "1/(1+t)");

  const SystemSpec spec = build_system(cfg);
  CHECK(spec.structure == StructureClass::Cooperative);
  CHECK(spec.mesh->node_count() == 41);
  CHECK(spec.a[0][5] == 1.0);
}

TEST_CASE("config rejections name the offence") {
  const auto reject = [](const std::string& body) {
    CHECK_THROWS_AS((void)parse_config(body), ConfigError);
  };
  reject("not json at all");
  reject(R"({"experiments": ["solve"]})");  // no kernel
  reject(R"({"kernel": {"family": "exp"}, "experiments": ["solve"]})");
  reject(R"({"kernel": {"family": "power"}, "experiments": ["solve"]})");
  reject(
      R"({"kernel": {"family": "power", "p": 2}, "experiments": ["warp"]})");
  reject(R"({"kernel": {"family": "power", "p": 2}, "experiments": []})");
  reject(
      R"({"kernel": {"family": "power", "p": 2}, "experiments": ["solve"],
          "solver": {"schedule": [0.25, 0.5]}})");
  reject(
      R"({"kernel": {"family": "power", "p": 2}, "experiments": ["solve"],
          "system": {"a": ["1+*x", "1"]}})");
  reject(
      R"({"kernel": {"family": "power", "p": 2}, "experiments": ["solve"],
          "system": {"structure": "diagonal"}})");
  reject(
      R"({"kernel": {"family": "power", "p": 2}, "experiments": ["solve"],
          "comparison": {"scale": -1}})");
  reject(
      R"({"kernel": {"family": "power", "p": 2}, "experiments": ["solve"],
          "mesh": {"dim": 3}})");
}

TEST_CASE("optional integrability exponents accept nulls") {
  const RunConfig cfg = parse_config(
      R"({"kernel": {"family": "power", "p": 2}, "experiments": ["solve"],
          "system": {"q": [null, 3]}})");
  CHECK(!cfg.q[0].has_value());
  REQUIRE(cfg.q[1].has_value());
  CHECK(*cfg.q[1] == 3.0);
}

TEST_CASE("command line rejects unusable invocations") {
  CHECK(run_cli("") != 0);  // config argument is required
  CHECK(run_cli((scratch_root() / "absent.json").string()) != 0);
  const fs::path bad = write_config("bad.json", "{broken");
  CHECK(run_cli(bad.string()) == 1);
}

TEST_CASE("full run writes artifacts and is deterministic") {
  const fs::path cfg = write_config("good.json", kGoodConfig);
  const fs::path out1 = scratch_root() / "out1";
  const fs::path out2 = scratch_root() / "out2";
  REQUIRE(run_cli(cfg.string() + " -q -o " + out1.string()) == 0);
  REQUIRE(run_cli(cfg.string() + " -q -o " + out2.string()) == 0);

  const std::vector<std::string> expected = {
      "1_nfunction-audit.csv",     "2_solve-fields.csv",
      "3_continuation.csv",        "3_continuation-diagnostics.csv",
      "3_continuation-fields.csv", "3_continuation-barriers.csv",
      "4_comparison.csv",          "5_barrier-fields.csv",
      "summary.txt"};
  for (const auto& name : expected) {
    CHECK_MESSAGE(fs::exists(out1 / name), "missing artifact ", name);
  }
  // staging area is promoted away on success
  CHECK(!fs::exists(fs::path(out1.string() + ".staging")));

  const std::string summary = slurp(out1 / "summary.txt");
  CHECK(summary.find("overall: ok") != std::string::npos);
  CHECK(summary.find("experiment 3_continuation: ok") != std::string::npos);

  // byte-identical CSV artifacts across reruns (summary carries a timestamp)
  for (const auto& name : expected) {
    if (name == "summary.txt") continue;
    CHECK_MESSAGE(slurp(out1 / name) == slurp(out2 / name),
                  "artifact differs between reruns: ", name);
  }
  const std::string audit = slurp(out1 / "1_nfunction-audit.csv");
  CHECK(audit.find("quantity,value") == 0);
  CHECK(audit.find("ell,2") != std::string::npos);
}

TEST_CASE("check-only validates without touching the filesystem") {
  const fs::path cfg = write_config("check.json", kGoodConfig);
  const fs::path out = scratch_root() / "check-out";
  CHECK(run_cli(cfg.string() + " -q --check-only -o " + out.string()) == 0);
  CHECK(!fs::exists(out));
  CHECK(!fs::exists(fs::path(out.string() + ".staging")));
}

TEST_CASE("validation failures exit 1 and leave no artifacts") {
  const std::string body = R"({
    "kernel": {"family": "power", "p": 2},
    "mesh": {"dim": 1, "cells": 30},
    "system": {"structure": "cooperative", "alpha": [0.5, 0.5],
               "sigma": [0.1, 0.1], "a": ["0-1", "1"], "b": ["1", "1"]},
    "experiments": ["solve"]
  })";
  const fs::path cfg = write_config("invalid.json", body);
  const fs::path out = scratch_root() / "invalid-out";
  CHECK(run_cli(cfg.string() + " -q -o " + out.string()) == 1);
  CHECK(!fs::exists(out));
  const fs::path staging(out.string() + ".staging");
  REQUIRE(fs::exists(staging / "summary.txt"));
  const std::string summary = slurp(staging / "summary.txt");
  CHECK(summary.find("overall: validation failed") != std::string::npos);
  // the check-only flag reports the same verdict
  CHECK(run_cli(cfg.string() + " -q --check-only") == 1);
}

TEST_CASE("solver failures exit 2 and leave no artifacts") {
  const std::string body = R"({
    "kernel": {"family": "power", "p": 2},
    "mesh": {"dim": 1, "cells": 30},
    "system": {"structure": "cooperative", "alpha": [1, 1],
               "sigma": [0.1, 0.1], "a": ["1", "1"], "b": ["1", "1"]},
    "solver": {"eps": 0.01, "max_iters": 1, "newton_tol": 1e-15,
               "step_tol": 1e-16},
    "experiments": ["solve"]
  })";
  const fs::path cfg = write_config("stall.json", body);
  const fs::path out = scratch_root() / "stall-out";
  CHECK(run_cli(cfg.string() + " -q -o " + out.string()) == 2);
  CHECK(!fs::exists(out));
  const fs::path staging(out.string() + ".staging");
  REQUIRE(fs::exists(staging / "summary.txt"));
  CHECK(slurp(staging / "summary.txt").find("overall: solver failed") !=
        std::string::npos);
}

}  // TEST_SUITE
