// Copyright 2026 The fastcal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "fastcal/config.hpp"

using namespace fastcal;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir(const std::string& tag) {
  fs::path d = fs::temp_directory_path() / ("fastcal_cli_" + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int cli(const std::string& args, const fs::path& log) {
  std::string cmd = std::string(FASTCAL_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json small_ioc() {
  return json::parse(R"({
    "schema_version": 1, "name": "tiny", "description": "test", "experiment": "ioc_single",
    "seed": 7, "trajectories": 12, "shots": 300, "record_stride": 10,
    "params": {"alpha": 1.0, "initial_offset": 0.2},
    "protocol": {"r": 1, "g": 0.05},
    "drift": {"kind": "random_walk", "step": 0.001},
    "arms": [{"label": "a"}, {"label": "b", "protocol": {"g": 0.1}}]
  })");
}

std::string error_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

void write_json(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(2); }

}  // namespace

TEST_CASE("list prints every bundled config") {
  fs::path d = scratch_dir("list");
  REQUIRE(cli("list", d / "log") == 0);
  std::string out = slurp(d / "log");
  int lines = 0;
  for (char c : out) lines += c == '\n';
  CHECK(lines >= 10);
  CHECK(out.find("fig2_mean_convergence\tioc_single\t") != std::string::npos);
  CHECK(out.find("fig9_qec_survival\tqec_513\t") != std::string::npos);
}

TEST_CASE("bundled configs parse and name their figure") {
  auto all = list_bundled_configs();
  REQUIRE(all.size() >= 10);
  for (const BundledConfig& b : all) {
    CAPTURE(b.name);
    CHECK(b.description.rfind("Figure", 0) == 0);
    ExperimentConfig cfg = load_config(b.path);
    CHECK(cfg.name == b.name);
    CHECK_FALSE(cfg.arms.empty());
    ExperimentConfig full = load_config(b.path, Overrides{std::nullopt, std::nullopt, std::nullopt, std::nullopt, true});
    CHECK(full.arms.size() == cfg.arms.size());
  }
  for (const std::string& k : experiment_kinds()) {
    CAPTURE(k);
    CHECK(load_config(find_bundled_config(k)).experiment == k);
  }
  CHECK_THROWS_AS(find_bundled_config("no_such_config"), ConfigError);
}

TEST_CASE("config errors name the offending field") {
  json j = small_ioc();
  j.erase("seed");
  CHECK(error_of(j).find("arms[0] (a): seed: missing") != std::string::npos);

  j = small_ioc();
  j["protocol"]["g"] = 0.7;
  CHECK(error_of(j).find("arms[0] (a): protocol: ioc.g") != std::string::npos);

  j = small_ioc();
  j["arms"][1]["protocol"]["r"] = 2;
  CHECK(error_of(j).find("arms[1] (b): protocol: ioc.r") != std::string::npos);

  j = small_ioc();
  j["drift"]["stepp"] = 0.1;
  CHECK(error_of(j).find("drift.stepp: unknown field") != std::string::npos);

  j = small_ioc();
  j["drift"] = json::parse(R"({"kind": "composite", "parts": [{"kind": "random_walk", "step": -1}]})");
  CHECK(error_of(j).find("drift.parts[0]: drift.step") != std::string::npos);

  j = small_ioc();
  j["arms"][1]["label"] = "a";
  CHECK(error_of(j).find("duplicate label") != std::string::npos);

  j = small_ioc();
  j["experiment"] = "teleport";
  CHECK(error_of(j).rfind("experiment:", 0) == 0);

  CHECK(error_of(small_ioc()).empty());
}

TEST_CASE("cli rejects bad configs without writing output") {
  fs::path d = scratch_dir("bad");
  json j = small_ioc();
  j.erase("seed");
  write_json(d / "noseed.json", j);
  CHECK(cli("run --config " + (d / "noseed.json").string() + " --out " + (d / "o1").string(), d / "log") == 2);
  CHECK(slurp(d / "log").find("seed") != std::string::npos);
  CHECK_FALSE(fs::exists(d / "o1"));

  std::ofstream(d / "broken.json") << "{\"name\": \"x\", ";
  CHECK(cli("run --config " + (d / "broken.json").string() + " --out " + (d / "o2").string(), d / "log") != 0);
  CHECK_FALSE(fs::exists(d / "o2"));

  write_json(d / "ok.json", small_ioc());
  CHECK(cli("doc_single --config " + (d / "ok.json").string() + " --out " + (d / "o3").string(), d / "log") == 2);
  CHECK_FALSE(fs::exists(d / "o3"));
}

TEST_CASE("cli output is reproducible and independent of worker count") {
  fs::path d = scratch_dir("repro");
  write_json(d / "c.json", small_ioc());
  std::string base = "run --config " + (d / "c.json").string();
  REQUIRE(cli(base + " --workers 1 --out " + (d / "w1").string(), d / "log") == 0);
  REQUIRE(cli(base + " --workers 1 --out " + (d / "w1b").string(), d / "log") == 0);
  REQUIRE(cli(base + " --workers 3 --out " + (d / "w3").string(), d / "log") == 0);
  REQUIRE(cli(base + " --seed 8 --out " + (d / "s8").string(), d / "log") == 0);
  for (const char* f : {"a.summary.csv", "b.summary.csv", "a.trajectories.csv", "summary.json"}) {
    CAPTURE(f);
    std::string ref = slurp(d / "w1" / f);
    CHECK_FALSE(ref.empty());
    CHECK(slurp(d / "w1b" / f) == ref);
    CHECK(slurp(d / "w3" / f) == ref);
  }
  CHECK(slurp(d / "s8" / "a.summary.csv") != slurp(d / "w1" / "a.summary.csv"));
}

TEST_CASE("overrides") {
  json j = small_ioc();
  j["full_scale"] = {{"trajectories", 40}, {"shots", 1000}};
  ExperimentConfig cfg = parse_config(j);
  CHECK(cfg.arms[0].run.trajectories == 12);
  CHECK(cfg.arms[0].run.shots == 300);
  Overrides o;
  o.full_scale = true;
  cfg = parse_config(j, o);
  CHECK(cfg.arms[1].run.trajectories == 40);
  CHECK(cfg.arms[1].run.shots == 1000);
  o.trajectories = 3;
  o.seed = 99;
  cfg = parse_config(j, o);
  CHECK(cfg.arms[0].run.trajectories == 3);
  CHECK(cfg.arms[0].resolved["trajectories"] == 3);
  CHECK(cfg.arms[0].resolved["seed"] == 99);
  CHECK(cfg.arms[0].run.seed != parse_config(j).arms[0].run.seed);
}

TEST_CASE("labels sanitize to file names") {
  CHECK(sanitize_label("g0.01") == "g0.01");
  CHECK(sanitize_label("a/b c").find('/') == std::string::npos);
  CHECK(sanitize_label("a/b c").find(' ') == std::string::npos);
}
