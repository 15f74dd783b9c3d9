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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fastcal/experiments.hpp"

namespace fastcal {

inline constexpr int kSchemaVersion = 1;

/// Invalid or malformed configuration; the message starts with the field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string>& experiment_kinds();

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<int> trajectories;
  std::optional<std::int64_t> shots;
  bool full_scale = false;
};

enum class CircuitFamily { gx, gxgy, cz };

struct ArmConfig {
  std::string label;
  std::string method;  // engine actually run: ioc, ioc_multi, doc, qec, rabi, none
  RunSpec run;
  IocSettings ioc;
  IocMultiSettings multi;
  std::vector<Circuit> circuits;
  CircuitFamily family = CircuitFamily::gx;
  DocSettings doc;
  QecSettings qec;
  RabiConfig rabi;
  double duty_cycle = 1.0;
  nlohmann::json resolved;  // fully merged arm config
};

struct ExperimentConfig {
  std::string name;
  std::string description;
  std::string experiment;
  bool trajectory_rows = true;
  std::vector<ArmConfig> arms;
  nlohmann::json source;
};

ExperimentConfig parse_config(const nlohmann::json& j, const Overrides& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

/// Bundled figure-reproduction configs, sorted by name.
struct BundledConfig {
  std::string name;
  std::string description;
  std::string experiment;
  std::filesystem::path path;
};
std::filesystem::path bundled_config_dir();
std::vector<BundledConfig> list_bundled_configs(const std::filesystem::path& dir = bundled_config_dir());
/// Path of a bundled config by name, or the default config for an experiment kind.
std::filesystem::path find_bundled_config(const std::string& name_or_kind,
                                          const std::filesystem::path& dir = bundled_config_dir());

struct ArmResult {
  std::string label;
  std::string method;
  std::vector<TrajectoryRecord> records;
  SummaryStats stats;
  /// Closed-form predictions per row for static-gain single-parameter IOC; empty otherwise.
  std::vector<double> predicted_mean;
  std::vector<double> predicted_variance;
  nlohmann::json summary;
};

struct ExperimentResult {
  std::vector<ArmResult> arms;
  nlohmann::json summary;
  std::string digest;
};

ArmResult run_arm(const ArmConfig& arm);
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes <label>.summary.csv, optionally <label>.trajectories.csv, and summary.json.
/// Files are staged under temporary names and renamed only after every write succeeds.
std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                                                 const std::filesystem::path& out_dir);

std::string sanitize_label(const std::string& label);

}  // namespace fastcal
