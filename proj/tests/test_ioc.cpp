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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fastcal/analytics.hpp"
#include "fastcal/experiments.hpp"
#include "fastcal/ioc.hpp"
#include "oracles.hpp"

using namespace fastcal;

namespace {

ControlParameterSet single(double offset, double alpha = 1.0) { return ControlParameterSet({0.0}, {-offset}, {alpha}); }

IocSettings static_settings(double g, int r = 1) {
  IocSettings s;
  s.g = g;
  s.r = r;
  return s;
}

/// Two-circuit per-shot contraction matrix of the generalized update in the linear regime.
Eigen::Matrix2d projector(const Eigen::VectorXd& s) { return s * s.transpose() / s.squaredNorm(); }

}  // namespace

TEST_CASE("measurement record keeps the most recent entries") {
  MeasurementRecord rec(4);
  for (int z : {1, 1, -1, 1, -1, -1}) rec.push(z);
  CHECK(rec.size() == 4);
  CHECK(rec.at(0) == -1);
  CHECK(rec.at(1) == 1);
  CHECK(rec.at(3) == -1);
  CHECK(rec.sum(0, 4) == -2);
  CHECK(rec.sum(1, 2) == 1);
  CHECK_THROWS_AS(rec.at(4), std::out_of_range);
  rec.clear();
  CHECK(rec.size() == 0);
  rec.push(1);
  CHECK(rec.sum(0, 1) == 1);
}

TEST_CASE("measurement record prefix sums survive many wraps") {
  MeasurementRecord rec(7);
  RngStream rng(5, 0);
  std::vector<int> all;
  for (int i = 0; i < 1000; ++i) {
    int z = rng.sign();
    rec.push(z);
    all.push_back(z);
    std::size_t n = rec.size();
    int expected = 0;
    for (std::size_t k = 1; k < n; ++k) expected += all[all.size() - n + k];
    CHECK(rec.sum(1, n) == expected);
  }
}

TEST_CASE("single update moves eta by exactly g over s") {
  for (int r : {1, 5}) {
    IocSingleEngine e(static_settings(0.1, r), single(0.0), DriftSpec::none(), NoiseModel{});
    TrajectoryRng rng(9, 0);
    IocStepResult res = e.step(rng);
    double s = r / 2.0;
    CHECK(res.updated);
    CHECK(e.state().params.eta[0] == doctest::Approx(res.z * 0.1 / s).epsilon(1e-14));
    CHECK(e.state().t == 1);
  }
}

TEST_CASE("update sign corrects a known offset") {
  IocSingleEngine pos(static_settings(0.05), single(0.5), DriftSpec::none(), NoiseModel{});
  TrajectoryRng rng(10, 0);
  int sum = 0;
  for (int i = 0; i < 200; ++i) sum += pos.step(rng).z;
  CHECK(sum < 0);
  CHECK(std::abs(pos.state().params.delta_eta(0)) < 0.5);
}

TEST_CASE("mean dynamics follow (1 - 2g)^t") {
  const double g = 0.01, mu0 = 0.05;
  const int n = 20000, t = 50;
  double sum = 0.0, sq = 0.0;
  for (int k = 0; k < n; ++k) {
    IocSingleEngine e(static_settings(g), single(mu0), DriftSpec::none(), NoiseModel{});
    TrajectoryRng rng(11, static_cast<std::uint64_t>(k));
    for (int i = 0; i < t; ++i) e.step(rng);
    double d = e.state().params.delta_eta(0);
    sum += d;
    sq += d * d;
  }
  double mean = sum / n, var = sq / n - mean * mean;
  CHECK(std::abs(mean - predict_mean(mu0, g, t)) < 4 * std::sqrt(var / n));
  double predicted = predict_variance_recursive(0.0, mu0, g, 0.5, 0.0, t);
  CHECK(var == doctest::Approx(predicted).epsilon(0.05));
}

TEST_CASE("batch of one is the unbatched protocol") {
  IocSettings a = static_settings(0.02), b = static_settings(0.02);
  b.batch = 1;
  IocSingleEngine ea(a, single(0.1), DriftSpec::random_walk(0.001), NoiseModel{0.001, 0.01});
  IocSingleEngine eb(b, single(0.1), DriftSpec::random_walk(0.001), NoiseModel{0.001, 0.01});
  TrajectoryRng ra(12, 3), rb(12, 3);
  for (int i = 0; i < 500; ++i) {
    ea.step(ra);
    eb.step(rb);
  }
  CHECK(ea.state().params.eta[0] == eb.state().params.eta[0]);
}

TEST_CASE("batched updates fire every N shots with the batch mean") {
  IocSettings s = static_settings(0.1);
  s.batch = 4;
  IocSingleEngine e(s, single(0.0), DriftSpec::none(), NoiseModel{});
  TrajectoryRng rng(13, 0);
  int sum = 0;
  for (int i = 1; i <= 4; ++i) {
    IocStepResult res = e.step(rng);
    sum += res.z;
    CHECK(res.updated == (i == 4));
    if (i < 4) CHECK(e.state().params.eta[0] == 0.0);
  }
  CHECK(e.state().params.eta[0] == doctest::Approx(0.1 / 0.5 * sum / 4.0));
}

TEST_CASE("runs are reproducible from the seed") {
  IocSettings s = static_settings(0.02, 5);
  s.alternate_spam = true;
  auto run = [&](std::uint64_t seed) {
    IocSingleEngine e(s, single(0.05), DriftSpec::random_walk(0.002), NoiseModel{0.001, 0.02});
    TrajectoryRng rng(seed, 4);
    for (int i = 0; i < 1000; ++i) e.step(rng);
    return e.state().params.delta_eta(0);
  };
  CHECK(run(1) == run(1));
  CHECK(run(1) != run(2));
}

TEST_CASE("SPAM alternation keeps the corrected signal unbiased") {
  IocSettings s = static_settings(0.0);
  s.alternate_spam = true;
  IocSingleEngine e(s, single(0.2), DriftSpec::none(), NoiseModel{0.0, 0.05});
  TrajectoryRng rng(14, 0);
  const int n = 100000;
  double even = 0.0, odd = 0.0;
  for (int i = 0; i < n; ++i) {
    IocStepResult res = e.step(rng);
    (i % 2 ? odd : even) += res.z;
  }
  // E[z] = -(1 - p_spam) sin(0.2) for both the plain and the flipped circuit.
  double expected = -(1.0 - 0.05) * std::sin(0.2);
  double se = 1.0 / std::sqrt(n / 2.0);
  CHECK(std::abs(even / (n / 2) - expected) < 4 * se);
  CHECK(std::abs(odd / (n / 2) - expected) < 4 * se);
}

TEST_CASE("indefinite repetition snapping") {
  CHECK(snap_indefinite_repetitions(0.3) == 1);
  CHECK(snap_indefinite_repetitions(2.9) == 1);
  CHECK(snap_indefinite_repetitions(3.1) == 5);
  CHECK(snap_indefinite_repetitions(12.0) == 13);
  CHECK(snap_indefinite_repetitions(60.0) == 61);
  for (double r = 1.0; r < 200.0; r += 0.37) CHECK(snap_indefinite_repetitions(r) % 4 == 1);
}

TEST_CASE("error estimators recover open-loop moments") {
  const double s = 0.5, mu = 0.1;
  MeasurementRecord rec(75 * 200);
  RngStream rng(15, 0);
  for (int i = 0; i < 75 * 200; ++i) rec.push(rng.bernoulli(0.5 - s * mu) ? 1 : -1);
  ErrorEstimate e = estimate_error(rec, 75, 200, s);
  CHECK(std::abs(e.mean - mu) < 4 * 1.0 / (2 * s * std::sqrt(75.0 * 200)));
  // Static offset: the variance estimate is the shot-noise floor 1 / (4 s^2 N).
  CHECK(e.variance == doctest::Approx((1.0 - 4 * s * s * mu * mu) / (4 * s * s * 200)).epsilon(0.35));
  MeasurementRecord small(10);
  CHECK_THROWS_AS(estimate_error(small, 75, 200, s), std::logic_error);
}

TEST_CASE("scheduled gain formula") {
  CHECK(scheduled_gain(0.01, 0.0, 0.5, 0.45) == doctest::Approx(2 * 0.01 * 0.25));
  CHECK(scheduled_gain(0.01, 0.1, 0.5, 0.45) == doctest::Approx(0.005 / (1 - 4 * 0.25 * 0.01)));
  CHECK(scheduled_gain(1.0, 0.0, 1.0, 0.45) == 0.45);
  CHECK(scheduled_gain(0.01, 2.0, 0.5, 0.45) == 0.45);
  CHECK(scheduled_gain(0.0, 0.0, 0.5, 0.45) == 0.0);
}

TEST_CASE("autocorrelation scheduler rules") {
  SchedulerSpec spec;
  spec.kind = SchedulerKind::autocorrelation;
  auto state_with = [&](const std::vector<int>& zs, double g, int r) {
    IocState st;
    st.g = g;
    st.r = r;
    st.record = MeasurementRecord(spec.record_capacity());
    for (int z : zs) st.record.push(z);
    st.shots_since_change = static_cast<std::int64_t>(zs.size());
    return st;
  };
  std::vector<int> constant(100, 1), alternating(100), balanced(100);
  for (int i = 0; i < 100; ++i) {
    alternating[i] = i % 2 ? 1 : -1;
    balanced[i] = (i / 2) % 2 ? 1 : -1;  // lag-one sum: -49 + 50 = 1 over pairs
  }
  IocState up = state_with(constant, 0.01, 1);
  CHECK(schedule_autocorrelation(up, spec).gain_changed);
  CHECK(up.g == doctest::Approx(0.01 * std::sqrt(10.0)));
  CHECK(up.record.size() == 0);
  IocState capped = state_with(constant, 0.3, 1);
  schedule_autocorrelation(capped, spec);
  CHECK(capped.g == kGainMax);
  IocState down = state_with(alternating, 0.1, 5);
  CHECK(schedule_autocorrelation(down, spec).gain_changed);
  CHECK(down.g == doctest::Approx(0.1 / std::sqrt(10.0)));
  CHECK(down.r == 5);
  int a = 0;
  for (std::size_t i = 1; i < balanced.size(); ++i) a += balanced[i] * balanced[i - 1];
  REQUIRE(std::abs(a) <= 1);
  IocState more = state_with(balanced, 0.1, 5);
  ScheduleDecision d = schedule_autocorrelation(more, spec);
  CHECK(d.repetitions_changed);
  CHECK(more.r == 13);
  CHECK(more.g == 0.1);
  IocState top = state_with(balanced, 0.1, 61);
  CHECK_FALSE(schedule_autocorrelation(top, spec).changed());
  IocState early = state_with(std::vector<int>(50, 1), 0.1, 1);
  CHECK_FALSE(schedule_autocorrelation(early, spec).changed());
}

TEST_CASE("approximate error scheduler waits for a full window and resets on r change") {
  SchedulerSpec spec;
  spec.kind = SchedulerKind::approx_error_estimation;
  spec.bins = 5;
  spec.bin_size = 10;
  spec.sliding = false;
  spec.schedule_repetitions = true;
  IocState st;
  st.params = single(0.0);
  st.r = 1;
  st.record = MeasurementRecord(spec.record_capacity());
  RngStream rng(16, 0);
  for (int i = 0; i < 49; ++i) {
    st.record.push(rng.sign());
    ++st.shots_since_change;
  }
  CHECK_FALSE(schedule_approx_error(st, spec).changed());
  st.record.push(1);
  ++st.shots_since_change;
  ErrorEstimate e = estimate_error(st.record, 5, 10, 0.5);
  int r_expected = snap_indefinite_repetitions(spec.delta_max / (std::abs(e.mean) + spec.kappa * std::sqrt(e.variance)));
  schedule_approx_error(st, spec);
  CHECK(st.r == std::max(1, r_expected));
  CHECK(st.g == doctest::Approx(scheduled_gain(e.variance, e.mean, st.r / 2.0, spec.g_max)));
  CHECK(st.record.size() == 0);
}

TEST_CASE("analytic schedule picks the exact gain and propagates the moments") {
  SchedulerSpec spec;
  spec.kind = SchedulerKind::analytic_optimal;
  spec.drift_step = 0.01;
  IocState st;
  st.params = single(0.0);
  st.predicted_mean = 0.1;
  st.predicted_variance = 0.02;
  schedule_analytic_optimal(st, spec);
  double g0 = exact_gain_schedule(0.02, 0.1, 0.5);
  CHECK(st.g == doctest::Approx(g0));
  CHECK(st.predicted_mean == doctest::Approx((1 - 2 * g0) * 0.1));
  CHECK(st.predicted_variance == doctest::Approx(predict_variance_recursive(0.02, 0.1, g0, 0.5, 0.01, 1)));
}

TEST_CASE("scheduler spec validation") {
  SchedulerSpec spec;
  spec.kind = SchedulerKind::autocorrelation;
  spec.r_sequence = {1, 6};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.r_sequence = {5, 1};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  IocSettings s;
  s.r = 3;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.r = 1;
  s.g = 0.5;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  CHECK(scheduler_kind_from_string("autocorrelation") == SchedulerKind::autocorrelation);
  CHECK_THROWS(scheduler_kind_from_string("pid"));
}

TEST_CASE("generalized update direction") {
  Eigen::VectorXd s(2);
  s << 0.5, -1.0;
  std::vector<double> d = multi_update(s, 0.01);
  REQUIRE(d.size() == 2);
  CHECK(d[0] == doctest::Approx(-0.01 * 0.5 / 1.25));
  CHECK(d[1] == doctest::Approx(0.01 * 1.0 / 1.25));
  CHECK(multi_update(Eigen::VectorXd::Zero(3), 0.01).empty());
}

TEST_CASE("multi-parameter engine cycles circuits and applies Jacobian rows") {
  ControlParameterSet p({0.0, 0.0}, {0.0, 0.0}, {1.0, -1.0});
  IocMultiSettings s;
  s.g = 0.01;
  IocMultiEngine e(s, {circuits::gxgy_c1(), circuits::gxgy_c2()}, p, DriftSpec::none(), NoiseModel{});
  TrajectoryRng rng(17, 0);
  for (int i = 0; i < 4; ++i) {
    std::vector<double> before = e.params().eta;
    IocMultiStepResult r = e.step(rng);
    CHECK(r.circuit == static_cast<std::size_t>(i % 2));
    std::vector<double> d = multi_update(e.jacobian().row(r.circuit, r.corrected), 0.01);
    CHECK(e.params().eta[0] - before[0] == doctest::Approx(d[0]));
    CHECK(e.params().eta[1] - before[1] == doctest::Approx(d[1]));
  }
  CHECK(e.t() == 4);
}

TEST_CASE("multi-parameter mean follows the linearized contraction") {
  std::vector<Circuit> set{circuits::gxgy_c1(), circuits::gxgy_c2()};
  ControlParameterSet zero({0.0, 0.0}, {0.0, 0.0}, {1.0, -1.0});
  IocMultiSettings s;
  s.g = 0.002;
  s.r = 5;
  Jacobian j = build_jacobian({circuits::gxgy_c1(5), circuits::gxgy_c2(5)}, zero);
  Eigen::Matrix2d m1 = Eigen::Matrix2d::Identity() - 2 * s.g * projector(j.row(0, 0));
  Eigen::Matrix2d m2 = Eigen::Matrix2d::Identity() - 2 * s.g * projector(j.row(1, 0));
  Eigen::Vector2d mu(0.02, 0.02);
  const int pairs = 1000, n = 400;
  Eigen::Vector2d predicted = mu;
  for (int k = 0; k < pairs; ++k) predicted = m2 * m1 * predicted;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero(), sq = Eigen::Vector2d::Zero();
  for (int k = 0; k < n; ++k) {
    ControlParameterSet p({0.0, 0.0}, {-mu(0), -mu(1)}, {1.0, -1.0});
    IocMultiEngine e(s, set, p, DriftSpec::none(), NoiseModel{});
    TrajectoryRng rng(18, static_cast<std::uint64_t>(k));
    for (int i = 0; i < 2 * pairs; ++i) e.step(rng);
    Eigen::Vector2d d(e.params().delta_eta(0), e.params().delta_eta(1));
    sum += d;
    sq += d.cwiseProduct(d);
  }
  Eigen::Vector2d mean = sum / n;
  for (int i = 0; i < 2; ++i) {
    double se = std::sqrt((sq(i) / n - mean(i) * mean(i)) / n);
    CHECK(std::abs(mean(i) - predicted(i)) < 4 * se + 0.02 * std::abs(predicted(i)));
  }
}

TEST_CASE("two-parameter Gx/Gy tuning reaches 0.05 by shot 5000" * doctest::may_fail()) {
  RunSpec spec;
  spec.seed = 404;
  spec.trajectories = 50;
  spec.shots = 10000;
  spec.stride = 100;
  spec.noise = NoiseModel{0.001, 0.01};
  spec.drift = DriftSpec::random_walk(0.001);
  spec.alpha = {1.0, -1.0};
  spec.offset.fixed = {0.2, 0.2};
  IocMultiSettings s;
  s.g = 0.001;
  s.r = 5;
  std::vector<TrajectoryRecord> recs = run_ioc_multi(spec, s, {circuits::gxgy_c1(), circuits::gxgy_c2()}, gxgy_infidelity);
  SummaryStats st = summarize(recs);
  std::size_t row = st.row_of(5000);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(st.mean_abs_delta[i][row] < 0.05);
    double worst = *std::max_element(st.mean_abs_delta[i].begin() + static_cast<std::ptrdiff_t>(row), st.mean_abs_delta[i].end());
    CHECK(worst < 0.1);
  }
}
