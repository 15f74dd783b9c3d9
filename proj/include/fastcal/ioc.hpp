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
#include <string>
#include <vector>

#include "fastcal/circuit.hpp"
#include "fastcal/drift.hpp"
#include "fastcal/rng.hpp"
#include "fastcal/sensitivity.hpp"

namespace fastcal {

constexpr double kGainMax = 0.45;

/// Independent randomness for shots and for drift, so that protocols run
/// against the same drift realization see identical eta_opt paths.
struct TrajectoryRng {
  RngStream shots;
  RngStream drift;

  TrajectoryRng(std::uint64_t seed, std::uint64_t trajectory)
      : shots(RngStream(seed, trajectory).split(1)), drift(RngStream(seed, trajectory).split(2)) {}
};

/// Fixed-capacity ring buffer of +-1 outcomes with prefix sums.
class MeasurementRecord {
 public:
  explicit MeasurementRecord(std::size_t capacity = 1);

  void push(int z);
  void clear();
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  /// i-th most recent entry counted from the oldest retained (0 = oldest).
  int at(std::size_t i) const;
  /// Sum of entries [from, to) in oldest-first indexing.
  std::int64_t sum(std::size_t from, std::size_t to) const;

 private:
  std::size_t capacity_;
  std::vector<std::int8_t> z_;
  std::vector<std::int64_t> prefix_;  // prefix_[k] = sum of the first k pushes, mod ring
  std::size_t head_ = 0;              // index of the oldest entry
  std::size_t size_ = 0;
  std::int64_t total_pushed_ = 0;
};

enum class SchedulerKind { static_gain, analytic_optimal, approx_error_estimation, autocorrelation };

std::string to_string(SchedulerKind kind);
SchedulerKind scheduler_kind_from_string(const std::string& name);

struct SchedulerSpec {
  SchedulerKind kind = SchedulerKind::static_gain;
  double g_max = kGainMax;

  // analytic_optimal: exact schedule from the predicted moments.
  double drift_step = 0.0;  // l, assumed known
  double prior_mean = 0.0;
  double prior_variance = 0.0;

  // approx_error_estimation
  int bins = 75;         // M
  int bin_size = 200;    // N
  double kappa = 3.0;
  double delta_max = 0.7853981633974483;
  bool sliding = true;
  bool schedule_gain = true;
  bool schedule_repetitions = false;
  int r_cap = 101;

  // autocorrelation
  int window = 100;  // h
  double a_upper = 20.0;
  double a_lower = -20.0;
  double b = 1.0;
  int r_max = 61;
  double g_multiplier = 3.1622776601683795;  // sqrt(10)
  std::vector<int> r_sequence = {1, 5, 13, 25, 41, 61};

  void validate() const;
  std::size_t record_capacity() const;
};

struct IocState {
  ControlParameterSet params;
  double g = 0.0;
  int r = 1;
  std::int64_t t = 0;
  MeasurementRecord record;
  std::int64_t shots_since_change = 0;
  // analytic_optimal predicted moments
  double predicted_mean = 0.0;
  double predicted_variance = 0.0;
};

struct ScheduleDecision {
  bool gain_changed = false;
  bool repetitions_changed = false;
  bool changed() const { return gain_changed || repetitions_changed; }
};

/// Snaps to the nearest integer = 1 mod 4, at least 1.
int snap_indefinite_repetitions(double r);

/// Estimators over M bins of N shots from the most recent M*N record entries.
struct ErrorEstimate {
  double mean = 0.0;
  double variance = 0.0;
};
ErrorEstimate estimate_error(const MeasurementRecord& record, int bins, int bin_size, double s);

/// Gain from the estimated or predicted moments; clamps to [0, g_max].
double scheduled_gain(double variance, double mean, double s, double g_max);

ScheduleDecision schedule_approx_error(IocState& state, const SchedulerSpec& spec);
ScheduleDecision schedule_autocorrelation(IocState& state, const SchedulerSpec& spec);
/// Exact schedule: picks g from the predicted moments, then propagates them one step.
ScheduleDecision schedule_analytic_optimal(IocState& state, const SchedulerSpec& spec);

struct IocSettings {
  double g = 0.1;
  int r = 1;
  int batch = 1;  // N_batch
  bool alternate_spam = false;
  SchedulerSpec scheduler;

  void validate() const;
};

struct IocStepResult {
  Outcome raw = 0;
  int z = 0;  // sign-corrected
  bool updated = false;
  ScheduleDecision schedule;
};

/// Single-parameter IOC on (Gx)^r, optionally batched and SPAM-alternated.
/// Order per shot: measure, update, schedule, drift.
class IocSingleEngine {
 public:
  IocSingleEngine(IocSettings settings, ControlParameterSet params, DriftSpec drift, NoiseModel noise);

  IocStepResult step(TrajectoryRng& rng);
  const IocState& state() const { return state_; }
  IocState& mutable_state() { return state_; }
  const IocSettings& settings() const { return settings_; }
  double sensitivity() const { return gx_circuit_sensitivity(state_.params.alpha[0], state_.r); }
  /// Forces a new repetition count (used by the scheduler and by callers).
  void set_repetitions(int r);

 private:
  IocSettings settings_;
  IocState state_;
  DriftProcess drift_;
  NoiseModel noise_;
  Circuit base_;
  Circuit flipped_;
  CircuitRunner runner_{1};
  double batch_sum_ = 0.0;
  int batch_count_ = 0;
};

/// Generalized update delta = -g s_z / |s_z|^2; empty when |s_z| is zero.
std::vector<double> multi_update(const Eigen::VectorXd& s_z, double g);

struct IocMultiSettings {
  double g = 0.001;
  int r = 1;
  bool alternate_spam = false;
  void validate() const;
};

struct IocMultiStepResult {
  std::size_t circuit = 0;
  bool flipped = false;
  Outcome raw = 0;
  Outcome corrected = 0;
  bool updated = false;
  bool skipped = false;  // zero-norm sensitivity
};

/// Multi-parameter IOC: round-robin over circuits, Jacobian rows drive the update.
class IocMultiEngine {
 public:
  IocMultiEngine(IocMultiSettings settings, std::vector<Circuit> circuits, ControlParameterSet params,
                 DriftSpec drift, NoiseModel noise);

  IocMultiStepResult step(TrajectoryRng& rng);
  const ControlParameterSet& params() const { return params_; }
  ControlParameterSet& mutable_params() { return params_; }
  const Jacobian& jacobian() const { return jacobian_; }
  std::int64_t t() const { return t_; }

 private:
  IocMultiSettings settings_;
  std::vector<Circuit> circuits_;
  std::vector<Circuit> flipped_;
  ControlParameterSet params_;
  DriftProcess drift_;
  NoiseModel noise_;
  Jacobian jacobian_;
  CircuitRunner runner_{1};
  std::int64_t t_ = 0;
};

}  // namespace fastcal
