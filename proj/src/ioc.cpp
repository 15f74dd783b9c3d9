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

#include "fastcal/ioc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fastcal {

MeasurementRecord::MeasurementRecord(std::size_t capacity)
    : capacity_(std::max<std::size_t>(capacity, 1)), z_(capacity_), prefix_(capacity_ + 1, 0) {}

void MeasurementRecord::push(int z) {
  std::size_t slot = (head_ + size_) % capacity_;
  if (size_ == capacity_) {
    head_ = (head_ + 1) % capacity_;
  } else {
    ++size_;
  }
  z_[slot] = static_cast<std::int8_t>(z);
  std::int64_t prev = prefix_[static_cast<std::size_t>(total_pushed_ % static_cast<std::int64_t>(capacity_ + 1))];
  ++total_pushed_;
  prefix_[static_cast<std::size_t>(total_pushed_ % static_cast<std::int64_t>(capacity_ + 1))] = prev + z;
}

void MeasurementRecord::clear() {
  head_ = 0;
  size_ = 0;
  total_pushed_ = 0;
  std::fill(prefix_.begin(), prefix_.end(), 0);
}

int MeasurementRecord::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("record index out of range");
  return z_[(head_ + i) % capacity_];
}

std::int64_t MeasurementRecord::sum(std::size_t from, std::size_t to) const {
  if (from > to || to > size_) throw std::out_of_range("record range out of bounds");
  auto p = [&](std::size_t k) {
    std::int64_t idx = total_pushed_ - static_cast<std::int64_t>(size_) + static_cast<std::int64_t>(k);
    return prefix_[static_cast<std::size_t>(idx % static_cast<std::int64_t>(capacity_ + 1))];
  };
  return p(to) - p(from);
}

std::string to_string(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::static_gain: return "static";
    case SchedulerKind::analytic_optimal: return "analytic_optimal";
    case SchedulerKind::approx_error_estimation: return "approx_error_estimation";
    case SchedulerKind::autocorrelation: return "autocorrelation";
  }
  return "static";
}

SchedulerKind scheduler_kind_from_string(const std::string& name) {
  for (SchedulerKind k : {SchedulerKind::static_gain, SchedulerKind::analytic_optimal,
                          SchedulerKind::approx_error_estimation, SchedulerKind::autocorrelation}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown scheduler kind '" + name + "'");
}

void SchedulerSpec::validate() const {
  if (!(g_max > 0.0 && g_max < 0.5)) throw std::invalid_argument("scheduler.g_max must be in (0, 0.5)");
  switch (kind) {
    case SchedulerKind::static_gain: break;
    case SchedulerKind::analytic_optimal:
      if (!(drift_step >= 0.0)) throw std::invalid_argument("scheduler.drift_step must be >= 0");
      if (!(prior_variance >= 0.0)) throw std::invalid_argument("scheduler.prior_variance must be >= 0");
      break;
    case SchedulerKind::approx_error_estimation:
      if (bins < 1 || bin_size < 1) throw std::invalid_argument("scheduler.bins and bin_size must be >= 1");
      if (!(kappa >= 0.0)) throw std::invalid_argument("scheduler.kappa must be >= 0");
      if (!(delta_max > 0.0)) throw std::invalid_argument("scheduler.delta_max must be > 0");
      if (r_cap < 1) throw std::invalid_argument("scheduler.r_cap must be >= 1");
      break;
    case SchedulerKind::autocorrelation:
      if (window < 2) throw std::invalid_argument("scheduler.window must be >= 2");
      if (!(a_lower < 0.0 && a_upper > 0.0)) throw std::invalid_argument("scheduler needs a_lower < 0 < a_upper");
      if (!(g_multiplier > 1.0)) throw std::invalid_argument("scheduler.g_multiplier must be > 1");
      if (r_sequence.empty()) throw std::invalid_argument("scheduler.r_sequence must be non-empty");
      for (std::size_t i = 0; i < r_sequence.size(); ++i) {
        if (r_sequence[i] < 1 || r_sequence[i] % 4 != 1) {
          throw std::invalid_argument("scheduler.r_sequence entries must be 1 mod 4");
        }
        if (i > 0 && r_sequence[i] <= r_sequence[i - 1]) {
          throw std::invalid_argument("scheduler.r_sequence must be strictly increasing");
        }
      }
      break;
  }
}

std::size_t SchedulerSpec::record_capacity() const {
  switch (kind) {
    case SchedulerKind::approx_error_estimation:
      return static_cast<std::size_t>(bins) * static_cast<std::size_t>(bin_size);
    case SchedulerKind::autocorrelation: return static_cast<std::size_t>(window);
    default: return 1;
  }
}

int snap_indefinite_repetitions(double r) {
  if (!(r >= 1.0)) return 1;
  if (r > 1e6) r = 1e6;
  double k = std::round((r - 1.0) / 4.0);
  return 1 + 4 * static_cast<int>(k);
}

ErrorEstimate estimate_error(const MeasurementRecord& record, int bins, int bin_size, double s) {
  std::size_t need = static_cast<std::size_t>(bins) * static_cast<std::size_t>(bin_size);
  if (record.size() < need) throw std::logic_error("not enough recorded shots for the estimator");
  std::size_t start = record.size() - need;
  double total = 0.0, squares = 0.0;
  for (int j = 0; j < bins; ++j) {
    std::size_t a = start + static_cast<std::size_t>(j) * static_cast<std::size_t>(bin_size);
    double sj = static_cast<double>(record.sum(a, a + static_cast<std::size_t>(bin_size)));
    total += sj;
    squares += sj * sj;
  }
  double mn = static_cast<double>(bins) * bin_size;
  ErrorEstimate e;
  e.mean = -total / (2.0 * mn * s);
  e.variance = squares / (4.0 * s * s * mn * bin_size) - e.mean * e.mean;
  e.variance = std::max(0.0, e.variance);
  return e;
}

double scheduled_gain(double variance, double mean, double s, double g_max) {
  double denom = 1.0 - 4.0 * s * s * mean * mean;
  if (denom <= 0.0) return g_max;
  double g = 2.0 * variance * s * s / denom;
  if (!std::isfinite(g)) return g_max;
  return std::clamp(g, 0.0, g_max);
}

namespace {

void reset_after_change(IocState& state) {
  state.record.clear();
  state.shots_since_change = 0;
}

}  // namespace

ScheduleDecision schedule_approx_error(IocState& state, const SchedulerSpec& spec) {
  ScheduleDecision d;
  const std::int64_t window = static_cast<std::int64_t>(spec.bins) * spec.bin_size;
  if (state.shots_since_change < window) return d;
  bool at_block = state.shots_since_change % window == 0;
  if (!spec.sliding && !at_block) return d;
  const double alpha = state.params.alpha[0];
  double s_old = gx_circuit_sensitivity(alpha, state.r);
  ErrorEstimate e = estimate_error(state.record, spec.bins, spec.bin_size, s_old);
  int r_new = state.r;
  if (spec.schedule_repetitions && at_block) {
    double denom = std::abs(alpha) * (std::abs(e.mean) + spec.kappa * std::sqrt(e.variance));
    double raw = denom > 0.0 ? spec.delta_max / denom : static_cast<double>(spec.r_cap);
    int cap = snap_indefinite_repetitions(spec.r_cap);
    if (cap > spec.r_cap) cap -= 4;
    r_new = std::clamp(snap_indefinite_repetitions(raw), 1, std::max(cap, 1));
  }
  if (spec.schedule_gain) {
    double s_new = gx_circuit_sensitivity(alpha, r_new);
    double g = scheduled_gain(e.variance, e.mean, std::abs(s_new), spec.g_max);
    d.gain_changed = g != state.g;
    state.g = g;
  }
  if (r_new != state.r) {
    state.r = r_new;
    d.repetitions_changed = true;
  }
  if (d.repetitions_changed || !spec.sliding) reset_after_change(state);
  return d;
}

ScheduleDecision schedule_autocorrelation(IocState& state, const SchedulerSpec& spec) {
  ScheduleDecision d;
  if (state.shots_since_change < spec.window || state.record.size() < static_cast<std::size_t>(spec.window)) {
    return d;
  }
  std::size_t n = state.record.size();
  std::size_t start = n - static_cast<std::size_t>(spec.window);
  double a = 0.0;
  for (std::size_t i = start + 1; i < n; ++i) a += state.record.at(i) * state.record.at(i - 1);
  if (a > spec.a_upper) {
    state.g = std::min(state.g * spec.g_multiplier, spec.g_max);
    d.gain_changed = true;
  } else if (a < spec.a_lower) {
    state.g = state.g / spec.g_multiplier;
    d.gain_changed = true;
  } else if (std::abs(a) <= spec.b && state.r <= spec.r_max) {
    for (int next : spec.r_sequence) {
      if (next > state.r) {
        if (next <= spec.r_max) {
          state.r = next;
          d.repetitions_changed = true;
        }
        break;
      }
    }
  }
  if (d.changed()) reset_after_change(state);
  return d;
}

ScheduleDecision schedule_analytic_optimal(IocState& state, const SchedulerSpec& spec) {
  ScheduleDecision d;
  double s = std::abs(gx_circuit_sensitivity(state.params.alpha[0], state.r));
  double g = scheduled_gain(state.predicted_variance, state.predicted_mean, s, spec.g_max);
  d.gain_changed = g != state.g;
  state.g = g;
  double mu = state.predicted_mean;
  double var = state.predicted_variance;
  double l = spec.drift_step;
  state.predicted_variance = std::max(0.0, var + g * g / (s * s) + l * l - 4.0 * g * var - 4.0 * g * g * mu * mu);
  state.predicted_mean = (1.0 - 2.0 * g) * mu;
  return d;
}

void IocSettings::validate() const {
  if (!(g >= 0.0 && g < 0.5)) throw std::invalid_argument("ioc.g must be in [0, 0.5)");
  if (r < 1 || r % 4 != 1) throw std::invalid_argument("ioc.r must be a positive integer equal to 1 mod 4");
  if (batch < 1) throw std::invalid_argument("ioc.batch must be >= 1");
  scheduler.validate();
}

IocSingleEngine::IocSingleEngine(IocSettings settings, ControlParameterSet params, DriftSpec drift,
                                 NoiseModel noise)
    : settings_(std::move(settings)), noise_(noise) {
  settings_.validate();
  params.validate();
  if (params.size() != 1) throw std::invalid_argument("single-parameter IOC needs exactly one parameter");
  state_.params = std::move(params);
  state_.g = settings_.g;
  state_.r = settings_.r;
  state_.record = MeasurementRecord(settings_.scheduler.record_capacity());
  state_.predicted_mean = settings_.scheduler.prior_mean;
  state_.predicted_variance = settings_.scheduler.prior_variance;
  drift_ = DriftProcess(std::move(drift), 1);
  set_repetitions(settings_.r);
}

void IocSingleEngine::set_repetitions(int r) {
  state_.r = r;
  base_ = circuits::gx_power(r);
  flipped_ = with_terminal_flip(base_);
}

IocStepResult IocSingleEngine::step(TrajectoryRng& rng) {
  IocStepResult res;
  bool flip = settings_.alternate_spam && (state_.t % 2 == 1);
  const Circuit& c = flip ? flipped_ : base_;
  res.raw = runner_.run(c, state_.params, noise_, rng.shots);
  Outcome bit = res.raw ^ c.outcome_flip;
  res.z = bit ? -1 : 1;
  if (settings_.scheduler.kind == SchedulerKind::approx_error_estimation ||
      settings_.scheduler.kind == SchedulerKind::autocorrelation) {
    state_.record.push(res.z);
  }
  batch_sum_ += res.z;
  if (++batch_count_ == settings_.batch) {
    double s = sensitivity();
    state_.params.eta[0] += state_.g / s * (batch_sum_ / settings_.batch);
    batch_sum_ = 0.0;
    batch_count_ = 0;
    res.updated = true;
  }
  ++state_.t;
  ++state_.shots_since_change;
  const SchedulerSpec& spec = settings_.scheduler;
  switch (spec.kind) {
    case SchedulerKind::static_gain: break;
    case SchedulerKind::analytic_optimal: res.schedule = schedule_analytic_optimal(state_, spec); break;
    case SchedulerKind::approx_error_estimation: res.schedule = schedule_approx_error(state_, spec); break;
    case SchedulerKind::autocorrelation: res.schedule = schedule_autocorrelation(state_, spec); break;
  }
  if (res.schedule.repetitions_changed) set_repetitions(state_.r);
  if (!drift_.is_static()) drift_.step(state_.params.eta_opt, rng.drift);
  return res;
}

std::vector<double> multi_update(const Eigen::VectorXd& s_z, double g) {
  double n2 = s_z.squaredNorm();
  if (!(n2 > 1e-24)) return {};
  std::vector<double> d(static_cast<std::size_t>(s_z.size()));
  for (Eigen::Index i = 0; i < s_z.size(); ++i) d[static_cast<std::size_t>(i)] = -g * s_z(i) / n2;
  return d;
}

void IocMultiSettings::validate() const {
  if (!(g >= 0.0 && g < 0.5)) throw std::invalid_argument("ioc.g must be in [0, 0.5)");
  if (r < 1) throw std::invalid_argument("ioc.r must be >= 1");
}

IocMultiEngine::IocMultiEngine(IocMultiSettings settings, std::vector<Circuit> circuits,
                               ControlParameterSet params, DriftSpec drift, NoiseModel noise)
    : settings_(settings), circuits_(std::move(circuits)), params_(std::move(params)), noise_(noise) {
  settings_.validate();
  params_.validate();
  if (circuits_.empty()) throw std::invalid_argument("multi-parameter IOC needs at least one circuit");
  for (Circuit& c : circuits_) {
    c.repetitions = settings_.r;
    c.validate(params_.size());
    flipped_.push_back(with_terminal_flip(c));
  }
  jacobian_ = build_jacobian(circuits_, params_);
  drift_ = DriftProcess(std::move(drift), params_.size());
}

IocMultiStepResult IocMultiEngine::step(TrajectoryRng& rng) {
  IocMultiStepResult res;
  std::size_t k = circuits_.size();
  res.circuit = static_cast<std::size_t>(t_ % static_cast<std::int64_t>(k));
  res.flipped = settings_.alternate_spam && ((t_ / static_cast<std::int64_t>(k)) % 2 == 1);
  const Circuit& c = res.flipped ? flipped_[res.circuit] : circuits_[res.circuit];
  res.raw = runner_.run(c, params_, noise_, rng.shots);
  res.corrected = res.raw ^ c.outcome_flip;
  std::vector<double> delta = multi_update(jacobian_.row(res.circuit, res.corrected), settings_.g);
  if (delta.empty()) {
    res.skipped = true;
  } else {
    for (std::size_t i = 0; i < delta.size(); ++i) params_.eta[i] += delta[i];
    res.updated = true;
  }
  ++t_;
  if (!drift_.is_static()) drift_.step(params_.eta_opt, rng.drift);
  return res;
}

}  // namespace fastcal
