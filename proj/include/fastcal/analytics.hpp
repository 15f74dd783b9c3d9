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
#include <vector>

#include "fastcal/gates.hpp"

namespace fastcal {

/// (1 - 2g)^t mu0.
double predict_mean(double mu0, double g, double t);
/// mu0 exp(-2 g t).
double predict_mean_continuous(double mu0, double g, double t);

/// Closed-form solution of the variance difference equation, including the
/// approximate mu0^2 transient term. Falls back to sigma0^2 + t l^2 at g = 0.
double predict_variance(double sigma0_sq, double mu0, double g, double s, double l, std::int64_t t);
/// Iterates the variance difference equation exactly.
double predict_variance_recursive(double sigma0_sq, double mu0, double g, double s, double l, std::int64_t t);
/// (sigma0^2 - g/4s^2 - l^2/4g) exp(-4 g t) + g/4s^2 + l^2/4g.
double predict_variance_continuous(double sigma0_sq, double g, double s, double l, double t);

/// g / (4 s^2) + l^2 / (4 g).
double stationary_variance(double g, double s, double l);
/// g = l s.
double optimal_gain(double l, double s);
/// l / (2 s).
double minimum_stationary_variance(double l, double s);
/// 2 sigma^2 s^2 / (1 - 4 s^2 mu^2); throws when the denominator is not positive.
double exact_gain_schedule(double variance, double mean, double s);

/// sum_{t=1}^{h-1} z_t z_{t-1} over the last h entries.
int autocorrelation_sum(std::span<const int> record, std::size_t h);

/// T_c / (T_c + T_e).
double duty_cycle(double t_c, double t_e);

enum EventFlag : std::uint8_t {
  kFlagUpdate = 1,
  kFlagAbort = 2,
  kFlagJump = 4,
  kFlagSchedule = 8,
  kFlagSkipped = 16,
};

/// Column-oriented per-shot log, thinned to every `stride`-th shot. Row t
/// holds the state after t shots. The infidelity accumulator covers every
/// shot regardless of thinning.
struct TrajectoryRecord {
  std::size_t n_params = 1;
  std::int64_t stride = 1;
  std::vector<std::int64_t> t;
  std::vector<double> eta;      // n_params per row
  std::vector<double> eta_opt;  // n_params per row
  std::vector<std::int64_t> outcome;  // -1 when the row has no shot
  std::vector<double> gain;
  std::vector<int> reps;
  std::vector<double> infidelity;
  std::vector<std::uint8_t> flags;

  double infidelity_sum = 0.0;
  std::int64_t shots = 0;
  std::int64_t updates = 0;
  std::int64_t aborts = 0;
  std::uint8_t pending_flags = 0;

  TrajectoryRecord() = default;
  TrajectoryRecord(std::size_t n_params, std::int64_t stride);

  void observe(std::int64_t shot, const ControlParameterSet& params, std::int64_t outcome, double g, int r,
               double infid, std::uint8_t flags);
  std::size_t rows() const { return t.size(); }
  double delta_eta(std::size_t row, std::size_t param = 0) const {
    return eta[row * n_params + param] - eta_opt[row * n_params + param];
  }
  /// Mean infidelity over all observed shots (t >= 1).
  double mean_infidelity() const { return shots ? infidelity_sum / static_cast<double>(shots) : 0.0; }
};

struct Quantiles {
  double q25 = 0.0, median = 0.0, q75 = 0.0;
};
/// Linear-interpolation quantiles.
Quantiles quantiles(std::vector<double> values);

struct SummaryStats {
  std::vector<std::int64_t> t;
  std::vector<std::vector<double>> mean_delta;      // [param][row]
  std::vector<std::vector<double>> var_delta;       // sample variance across trajectories
  std::vector<std::vector<double>> mean_abs_delta;
  std::vector<double> mean_infidelity;
  std::vector<double> sd_infidelity;
  std::vector<double> mean_gain;
  std::vector<double> mean_reps;
  std::vector<double> experiment_mean_infidelity;   // one per trajectory
  Quantiles experiment_infidelity;
  std::size_t trajectories = 0;

  /// Standard error of the mean Delta eta for one parameter at one row.
  double stderr_delta(std::size_t param, std::size_t row) const;
  /// Mean over rows in [from, to) of the per-row across-trajectory variance.
  double window_mean_variance(std::size_t param, std::size_t from, std::size_t to) const;
  double window_mean_abs(std::size_t param, std::size_t from, std::size_t to) const;
  std::size_t row_of(std::int64_t shot) const;
};

/// Per-row across-trajectory statistics; all records must share t columns.
SummaryStats summarize(const std::vector<TrajectoryRecord>& records);

}  // namespace fastcal
