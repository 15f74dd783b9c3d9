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
#include <string>
#include <vector>

#include "fastcal/analytics.hpp"
#include "fastcal/circuit.hpp"
#include "fastcal/doc.hpp"
#include "fastcal/drift.hpp"
#include "fastcal/ioc.hpp"
#include "fastcal/qec.hpp"
#include "fastcal/rabi.hpp"

namespace fastcal {

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Results must be
/// written to slot i so output order never depends on scheduling.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

enum class InfidelityKind { unitary, process };

/// Initial Delta eta per parameter: fixed values, or i.i.d. uniform draws per trajectory.
struct OffsetSpec {
  std::vector<double> fixed = {0.0};
  bool uniform = false;
  double lo = 0.0;
  double hi = 0.0;

  std::vector<double> draw(std::size_t n_params, RngStream& rng) const;
};

struct RunSpec {
  std::uint64_t seed = 1;
  int trajectories = 1;
  std::int64_t shots = 1000;
  std::int64_t stride = 1;
  int workers = 1;
  NoiseModel noise;
  DriftSpec drift;
  std::vector<double> alpha = {1.0};
  OffsetSpec offset;
  InfidelityKind infidelity = InfidelityKind::unitary;
  /// Idle shots after every calibration shot (duty-cycle experiments).
  std::int64_t idle_per_shot = 0;

  void validate() const;
  ControlParameterSet initial_params(std::size_t n_params, std::uint64_t trajectory) const;
};

/// Infidelity of the single-parameter Gx gate at its current miscalibration.
double gx_infidelity(const ControlParameterSet& params, InfidelityKind kind, double p_gate);
/// Mean of the Gx and Gy unitary infidelities for the two-parameter example.
double gxgy_infidelity(const ControlParameterSet& params);
double cz_infidelity(const ControlParameterSet& params);

std::vector<TrajectoryRecord> run_ioc_single(const RunSpec& spec, const IocSettings& settings);
std::vector<TrajectoryRecord> run_ioc_multi(const RunSpec& spec, const IocMultiSettings& settings,
                                            const std::vector<Circuit>& circuits,
                                            const std::function<double(const ControlParameterSet&)>& infidelity);
std::vector<TrajectoryRecord> run_doc_single(const RunSpec& spec, const DocSettings& settings);
/// Records hold 1 - survival in the infidelity column and the syndrome in the outcome column.
std::vector<TrajectoryRecord> run_qec(const RunSpec& spec, const QecSettings& settings);
std::vector<TrajectoryRecord> run_rabi(const RunSpec& spec, const RabiConfig& cfg);
/// No calibration at all; drift only.
std::vector<TrajectoryRecord> run_uncalibrated(const RunSpec& spec, std::size_t n_params,
                                               const std::function<double(const ControlParameterSet&)>& infidelity);

/// IOC gain for the duty-cycle comparison: sqrt(T_e + 1) l r.
double duty_cycle_ioc_gain(std::int64_t idle_shots, double l, int r);
/// Idle shots after each single-shot calibration: round(1/D - 1).
std::int64_t single_shot_idle(double duty_cycle);

}  // namespace fastcal
