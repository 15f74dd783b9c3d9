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
#include "fastcal/ioc.hpp"

namespace fastcal {

enum class Estimator { mle, mvue };

std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& name);

/// Failure-probability estimate after n failures and k successes.
/// MLE = n / (n + k); MVUE = (n - 1) / (n + k - 1), which needs n >= 2.
double estimate_p(int n, int k, Estimator which);

/// Outcome bit that (Gx)^r deterministically returns for even r: 1 when r/2 is odd.
Outcome definite_target(int r);

struct DocSchedulerSpec {
  bool enabled = false;
  int n_min = 10;
  int n_max = 50;
  int delta_r = 8;
  int r_min = 2;
  int r_cap = 200;

  void validate() const;
};

struct DocSettings {
  int n = 2;  // failure cutoff
  int r = 6;  // even
  Estimator estimator = Estimator::mle;
  DocSchedulerSpec scheduler;

  void validate() const;
};

struct DocState {
  ControlParameterSet params;
  int coin = 1;
  int runs = 0;      // M
  int failures = 0;  // m
  int r = 2;
  std::int64_t t = 0;
};

struct DocEvent {
  bool update = false;
  bool abort = false;
  int sign = 0;          // coin used by the update
  double step = 0.0;     // unsigned magnitude
  double p_hat = 0.0;
  int shots = 0;         // M at the end of the episode
  int r_before = 0;
  int r_after = 0;
};

/// Step magnitude sqrt(p_hat / h) with h = r^2 alpha^2, clamped to pi / (2 r |alpha|).
double doc_step_magnitude(double p_hat, int r, double alpha);

/// Counts one shot of parameter `index` and applies the coin-flip update
/// when the failure count reaches n. Drift is the caller's job.
DocEvent doc_record_outcome(DocState& state, const DocSettings& settings, bool failure, std::size_t index = 0);

/// Repetition schedule applied at the end of a counted shot. Fires r -= delta_r when an
/// update came in fewer than n_min shots, and aborts the episode (r += delta_r) after
/// n_max shots without reaching n failures.
void schedule_doc_r(DocState& state, const DocSchedulerSpec& spec, DocEvent& event);

/// True iff consecutive update signs strictly alternate.
bool coin_alternation_property_check(const std::vector<int>& update_signs);

struct DocStepResult {
  Outcome raw = 0;
  bool failure = false;
  DocEvent event;
};

/// Single-parameter DOC on (Gx)^r. Order per shot: measure, count/update, schedule, drift.
class DocSingleEngine {
 public:
  DocSingleEngine(DocSettings settings, ControlParameterSet params, DriftSpec drift, NoiseModel noise);

  DocStepResult step(TrajectoryRng& rng);
  const DocState& state() const { return state_; }
  DocState& mutable_state() { return state_; }
  const std::vector<int>& update_signs() const { return signs_; }

 private:
  DocSettings settings_;
  DocState state_;
  DriftProcess drift_;
  NoiseModel noise_;
  Circuit circuit_;
  CircuitRunner runner_{1};
  std::vector<int> signs_;
};

}  // namespace fastcal
