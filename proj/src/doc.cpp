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

#include "fastcal/doc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fastcal {

std::string to_string(Estimator e) { return e == Estimator::mle ? "mle" : "mvue"; }

Estimator estimator_from_string(const std::string& name) {
  if (name == "mle") return Estimator::mle;
  if (name == "mvue") return Estimator::mvue;
  throw std::invalid_argument("unknown estimator '" + name + "'");
}

double estimate_p(int n, int k, Estimator which) {
  if (n < 1) throw std::invalid_argument("estimate_p needs n >= 1");
  if (k < 0) throw std::invalid_argument("estimate_p needs k >= 0");
  if (which == Estimator::mle) return static_cast<double>(n) / (n + k);
  if (n < 2) throw std::invalid_argument("MVUE needs n >= 2");
  return static_cast<double>(n - 1) / (n + k - 1);
}

Outcome definite_target(int r) {
  if (r < 2 || r % 2 != 0) throw std::invalid_argument("definite-outcome circuit needs even r >= 2");
  return (r / 2) % 2 == 1 ? 1u : 0u;
}

void DocSchedulerSpec::validate() const {
  if (!enabled) return;
  if (!(0 < n_min && n_min < n_max)) throw std::invalid_argument("doc scheduler needs 0 < n_min < n_max");
  if (delta_r < 2 || delta_r % 2 != 0) throw std::invalid_argument("doc scheduler delta_r must be even and >= 2");
  if (r_min < 2 || r_min % 2 != 0) throw std::invalid_argument("doc scheduler r_min must be even and >= 2");
  if (r_cap < r_min) throw std::invalid_argument("doc scheduler r_cap must be >= r_min");
}

void DocSettings::validate() const {
  if (n < 1) throw std::invalid_argument("doc.n must be >= 1");
  if (estimator == Estimator::mvue && n < 2) throw std::invalid_argument("MVUE needs doc.n >= 2");
  if (r < 2 || r % 2 != 0) throw std::invalid_argument("doc.r must be even and >= 2");
  scheduler.validate();
}

double doc_step_magnitude(double p_hat, int r, double alpha) {
  double h = static_cast<double>(r) * r * alpha * alpha;
  double step = std::sqrt(p_hat / h);
  double cap = std::numbers::pi / (2.0 * r * std::abs(alpha));
  return std::min(step, cap);
}

DocEvent doc_record_outcome(DocState& state, const DocSettings& settings, bool failure, std::size_t index) {
  DocEvent ev;
  ev.r_before = ev.r_after = state.r;
  ++state.runs;
  if (failure) ++state.failures;
  ev.shots = state.runs;
  if (state.failures >= settings.n) {
    int k = state.runs - state.failures;
    ev.p_hat = estimate_p(settings.n, k, settings.estimator);
    ev.step = doc_step_magnitude(ev.p_hat, state.r, state.params.alpha[index]);
    ev.sign = state.coin;
    state.params.eta[index] += state.coin * ev.step;
    state.coin = -state.coin;
    state.runs = 0;
    state.failures = 0;
    ev.update = true;
  }
  return ev;
}

void schedule_doc_r(DocState& state, const DocSchedulerSpec& spec, DocEvent& event) {
  if (!spec.enabled) return;
  if (event.update) {
    if (event.shots < spec.n_min) state.r = std::max(spec.r_min, state.r - spec.delta_r);
  } else if (state.runs >= spec.n_max) {
    state.runs = 0;
    state.failures = 0;
    event.abort = true;
    state.r = std::min(spec.r_cap - spec.r_cap % 2, state.r + spec.delta_r);
  }
  event.r_after = state.r;
}

bool coin_alternation_property_check(const std::vector<int>& update_signs) {
  for (std::size_t i = 1; i < update_signs.size(); ++i) {
    if (update_signs[i] != -update_signs[i - 1]) return false;
  }
  return true;
}

DocSingleEngine::DocSingleEngine(DocSettings settings, ControlParameterSet params, DriftSpec drift,
                                 NoiseModel noise)
    : settings_(settings), noise_(noise) {
  settings_.validate();
  params.validate();
  if (params.size() != 1) throw std::invalid_argument("single-parameter DOC needs exactly one parameter");
  state_.params = std::move(params);
  state_.r = settings_.r;
  drift_ = DriftProcess(std::move(drift), 1);
  circuit_ = circuits::gx_power(state_.r);
}

DocStepResult DocSingleEngine::step(TrajectoryRng& rng) {
  DocStepResult res;
  if (circuit_.repetitions != state_.r) circuit_ = circuits::gx_power(state_.r);
  res.raw = runner_.run(circuit_, state_.params, noise_, rng.shots);
  res.failure = res.raw != definite_target(state_.r);
  res.event = doc_record_outcome(state_, settings_, res.failure);
  schedule_doc_r(state_, settings_.scheduler, res.event);
  if (res.event.update) signs_.push_back(res.event.sign);
  ++state_.t;
  if (!drift_.is_static()) drift_.step(state_.params.eta_opt, rng.drift);
  return res;
}

}  // namespace fastcal
