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
#include <functional>
#include <vector>

#include "fastcal/circuit.hpp"
#include "fastcal/drift.hpp"
#include "fastcal/ioc.hpp"

namespace fastcal {

struct RabiConfig {
  int r_points = 20;  // circuits (Gx)^r_i for r_i in [0, r_points - 1]
  int n_batch = 20;   // shots per circuit
  double a_lo = 0.9, a_hi = 1.0;
  double b_lo = 0.9, b_hi = 1.0;
  double theta_lo = 0.7853981633974483, theta_hi = 2.356194490192345;
  double c_lo = 0.0, c_hi = 0.1;
  double duty_cycle = 1.0;
  int starts = 5;
  /// Data whose max - min falls below this is flagged degenerate.
  double degenerate_range = 0.05;

  void validate() const;
  std::int64_t calibration_shots() const { return static_cast<std::int64_t>(r_points) * n_batch; }
  /// T_e = round(T_c (1/D - 1)).
  std::int64_t idle_shots() const;
};

struct RabiPoint {
  int r = 0;
  double frequency = 0.0;  // fraction of "1" outcomes
  int shots = 0;
};

struct FitResult {
  double a = 0.0, b = 0.0, c = 0.0;
  double theta_est = 0.0;
  double residual_norm = 0.0;
  bool converged = false;
  bool degenerate = false;

  bool usable() const { return converged && !degenerate; }
};

/// a b^r sin^2(theta r / 2) + c.
double rabi_model(double a, double b, double theta, double c, int r);

using ShotHook = std::function<void(const ControlParameterSet&)>;

/// N_batch shots of each (Gx)^{r_i}; drift advances after every shot and the
/// hook (if any) sees the parameters after each shot.
std::vector<RabiPoint> collect_rabi_data(ControlParameterSet& params, const NoiseModel& noise, DriftProcess& drift,
                                         const RabiConfig& cfg, TrajectoryRng& rng, const ShotHook& hook = {});

/// Bounded multi-start Levenberg-Marquardt fit of the Rabi model.
FitResult fit_rabi(const std::vector<RabiPoint>& data, const RabiConfig& cfg);

struct RabiCycleResult {
  FitResult fit;
  bool updated = false;
  double correction = 0.0;
  std::int64_t calibration_shots = 0;
  std::int64_t idle_shots = 0;
};

/// Collect, fit, correct eta by (pi/2 - theta_est)/alpha, then idle for T_e shots.
RabiCycleResult rabi_calibration_cycle(ControlParameterSet& params, const NoiseModel& noise, DriftProcess& drift,
                                       const RabiConfig& cfg, TrajectoryRng& rng, const ShotHook& hook = {});

}  // namespace fastcal
