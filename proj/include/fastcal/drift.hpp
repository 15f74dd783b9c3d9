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
#include <span>
#include <string>
#include <vector>

#include "fastcal/rng.hpp"

namespace fastcal {

enum class DriftKind { none, random_walk, ornstein_uhlenbeck, jump, one_over_f, composite };

std::string to_string(DriftKind kind);
DriftKind drift_kind_from_string(const std::string& name);

struct DriftSpec {
  DriftKind kind = DriftKind::none;
  double step = 0.0;          // random_walk: l
  double reversion = 0.0;     // ornstein_uhlenbeck: alpha_rev
  double volatility = 0.0;    // ornstein_uhlenbeck: sigma_vol
  double mean = 0.0;          // ornstein_uhlenbeck: reversion target
  std::int64_t jump_shot = 0; // jump: shot index at which the jump lands
  double jump_magnitude = 0.0;
  double scale = 0.001;       // one_over_f: k
  int components = 7;         // one_over_f
  std::vector<DriftSpec> parts;  // composite, applied in order

  static DriftSpec none() { return {}; }
  static DriftSpec random_walk(double step);
  static DriftSpec ornstein_uhlenbeck(double reversion, double volatility, double mean = 0.0);
  static DriftSpec jump(std::int64_t shot, double magnitude);
  static DriftSpec one_over_f(double scale = 0.001, int components = 7);
  static DriftSpec composite(std::vector<DriftSpec> parts);

  void validate() const;
};

struct OneOverFCoefficients {
  std::vector<double> reversion;   // 10 * (1/4)^i, i = 1..n
  std::vector<double> volatility;  // 2^i * (1 - exp(-2 * reversion_i))
};
OneOverFCoefficients one_over_f_coefficients(int components);

/// Evolves eta_opt for every parameter independently, one call per shot.
class DriftProcess {
 public:
  DriftProcess() = default;
  DriftProcess(DriftSpec spec, std::size_t n_params);

  const DriftSpec& spec() const { return spec_; }
  /// Number of drift steps taken so far.
  std::int64_t t() const { return t_; }
  bool is_static() const { return leaves_.empty(); }

  /// Advances the shot counter and updates eta_opt in place.
  void step(std::span<double> eta_opt, RngStream& rng);

 private:
  struct Leaf {
    DriftSpec spec;
    std::vector<double> decay;
    std::vector<double> noise;
  };

  void flatten(const DriftSpec& spec);

  DriftSpec spec_;
  std::size_t n_params_ = 0;
  std::vector<Leaf> leaves_;
  // one_over_f component states, per leaf then per parameter then per component.
  std::vector<std::vector<double>> components_;
  std::int64_t t_ = 0;
};

}  // namespace fastcal
