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

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fastcal/config.hpp"

namespace {

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<int> trajectories;
  std::optional<std::int64_t> shots;
  std::string out;
  bool full_scale = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool config_required) {
  auto* c = cmd->add_option("--config", f.config, "Experiment config (JSON file or bundled config name)");
  if (config_required) c->required();
  cmd->add_option("--seed", f.seed, "Override the master seed");
  cmd->add_option("--workers", f.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--trajectories", f.trajectories, "Override the trajectory count")->check(CLI::PositiveNumber);
  cmd->add_option("--shots", f.shots, "Override the shot count")->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "Output directory (default: out/<config name>)");
  cmd->add_flag("--full-scale", f.full_scale, "Apply the config's full-scale budget");
}

std::filesystem::path resolve_config(const std::string& arg, const std::string& kind) {
  if (arg.empty()) return fastcal::find_bundled_config(kind);
  if (std::filesystem::exists(arg)) return arg;
  return fastcal::find_bundled_config(arg);
}

int run(const RunFlags& f, const std::string& kind) {
  fastcal::Overrides o;
  o.seed = f.seed;
  o.workers = f.workers;
  o.trajectories = f.trajectories;
  o.shots = f.shots;
  o.full_scale = f.full_scale;
  std::filesystem::path path = resolve_config(f.config, kind);
  fastcal::ExperimentConfig cfg = fastcal::load_config(path, o);
  if (!kind.empty() && cfg.experiment != kind) {
    throw fastcal::ConfigError("experiment: config is \"" + cfg.experiment + "\" but the subcommand is \"" + kind +
                               "\"");
  }
  fastcal::ExperimentResult res = fastcal::run_experiment(cfg);
  std::filesystem::path out = f.out.empty() ? std::filesystem::path("out") / cfg.name : std::filesystem::path(f.out);
  fastcal::write_outputs(cfg, res, out);
  std::cout << res.digest << " -> " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fastcal: fast-feedback gate calibration simulator"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List bundled experiment configs");
  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "Run any experiment config");
  add_run_flags(run_cmd, run_flags, true);

  std::vector<std::pair<std::string, CLI::App*>> kinds;
  std::vector<RunFlags> kind_flags(fastcal::experiment_kinds().size());
  for (std::size_t i = 0; i < fastcal::experiment_kinds().size(); ++i) {
    const std::string& k = fastcal::experiment_kinds()[i];
    auto* cmd = app.add_subcommand(k, "Run the " + k + " experiment (default: its bundled config)");
    add_run_flags(cmd, kind_flags[i], false);
    kinds.emplace_back(k, cmd);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const fastcal::BundledConfig& b : fastcal::list_bundled_configs()) {
        std::cout << b.name << "\t" << b.experiment << "\t" << b.description << "\n";
      }
      return 0;
    }
    if (run_cmd->parsed()) return run(run_flags, "");
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      if (kinds[i].second->parsed()) return run(kind_flags[i], kinds[i].first);
    }
  } catch (const fastcal::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
