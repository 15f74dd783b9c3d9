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

#include <cmath>
#include <stdexcept>
#include <numbers>
#include <vector>

#include "fastcal/rabi.hpp"
#include "oracles.hpp"

using namespace fastcal;

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

std::vector<RabiPoint> synthetic(double a, double b, double theta, double c, int points = 20) {
  std::vector<RabiPoint> d;
  for (int r = 0; r < points; ++r) d.push_back({r, rabi_model(a, b, theta, c, r), 1000000});
  return d;
}

}  // namespace

TEST_CASE("Rabi model values") {
  CHECK(rabi_model(1.0, 1.0, kHalfPi, 0.0, 0) == 0.0);
  CHECK(rabi_model(1.0, 1.0, kHalfPi, 0.0, 1) == doctest::Approx(0.5));
  CHECK(rabi_model(1.0, 1.0, kHalfPi, 0.0, 2) == doctest::Approx(1.0));
  CHECK(rabi_model(0.9, 0.99, kHalfPi, 0.02, 2) == doctest::Approx(0.9 * 0.99 * 0.99 + 0.02));
}

TEST_CASE("fit recovers synthetic parameters") {
  RabiConfig cfg;
  FitResult f = fit_rabi(synthetic(0.99, 0.999, kHalfPi + 0.05, 0.0), cfg);
  CHECK(f.usable());
  CHECK(std::abs(f.theta_est - (kHalfPi + 0.05)) < 1e-3);
  CHECK(f.a == doctest::Approx(0.99).epsilon(1e-3));
  CHECK(f.residual_norm < 1e-4);
  FitResult g = fit_rabi(synthetic(0.95, 0.995, kHalfPi - 0.12, 0.03), cfg);
  CHECK(std::abs(g.theta_est - (kHalfPi - 0.12)) < 1e-3);
}

TEST_CASE("flat data is flagged degenerate") {
  RabiConfig cfg;
  std::vector<RabiPoint> flat;
  for (int r = 0; r < 20; ++r) flat.push_back({r, 0.5, 20});
  FitResult f = fit_rabi(flat, cfg);
  CHECK(f.degenerate);
  CHECK_FALSE(f.usable());
  CHECK_THROWS_AS(fit_rabi(std::vector<RabiPoint>(flat.begin(), flat.begin() + 3), cfg), std::invalid_argument);
}

TEST_CASE("collected data follows the Born probabilities") {
  RabiConfig cfg;
  cfg.n_batch = 4000;
  ControlParameterSet p({0.0}, {-0.03}, {1.0});
  DriftProcess none(DriftSpec::none(), 1);
  TrajectoryRng rng(51, 0);
  std::vector<RabiPoint> data = collect_rabi_data(p, NoiseModel{0.0, 0.02}, none, cfg, rng);
  REQUIRE(data.size() == 20);
  for (const RabiPoint& pt : data) {
    double ideal = pt.r == 0 ? 0.0 : gx_power_probability_one(pt.r, 0.03);
    double expected = 0.02 / 2 + (1 - 0.02) * ideal;
    CHECK(std::abs(pt.frequency - expected) < 4 * oracle::binomial_se(expected, cfg.n_batch) + 1e-12);
  }
  CHECK(data[0].frequency == doctest::Approx(0.01).epsilon(0.5));
}

TEST_CASE("collection is reproducible and advances drift per shot") {
  RabiConfig cfg;
  auto run = [&] {
    ControlParameterSet p({0.0}, {0.0}, {1.0});
    DriftProcess d(DriftSpec::random_walk(0.001), 1);
    TrajectoryRng rng(52, 1);
    int calls = 0;
    std::vector<RabiPoint> data = collect_rabi_data(p, NoiseModel{}, d, cfg, rng, [&](const ControlParameterSet&) { ++calls; });
    CHECK(calls == 400);
    CHECK(d.t() == 400);
    std::vector<double> f;
    for (const RabiPoint& pt : data) f.push_back(pt.frequency);
    return f;
  };
  CHECK(run() == run());
}

TEST_CASE("calibration cycle corrects the fitted rotation") {
  RabiConfig cfg;
  cfg.n_batch = 2000;
  const int n = 20;
  double sum = 0.0, sq = 0.0;
  for (int k = 0; k < n; ++k) {
    ControlParameterSet p({0.0}, {-0.05}, {1.0});
    DriftProcess none(DriftSpec::none(), 1);
    TrajectoryRng rng(53, static_cast<std::uint64_t>(k));
    RabiCycleResult res = rabi_calibration_cycle(p, NoiseModel{}, none, cfg, rng);
    CHECK(res.updated);
    CHECK(res.correction == doctest::Approx((kHalfPi - res.fit.theta_est)));
    CHECK(res.idle_shots == 0);
    double d = p.delta_eta(0);
    sum += d;
    sq += d * d;
  }
  double mean = sum / n, sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean) < 3 * sd / std::sqrt(n) + 1e-4);
  CHECK(std::abs(mean) < 0.01);
}

TEST_CASE("duty-cycle accounting") {
  RabiConfig cfg;
  CHECK(cfg.calibration_shots() == 400);
  CHECK(cfg.idle_shots() == 0);
  cfg.duty_cycle = 0.1;
  CHECK(cfg.idle_shots() == 3600);
  CHECK(static_cast<double>(cfg.calibration_shots()) / (cfg.calibration_shots() + cfg.idle_shots()) == doctest::Approx(0.1));
  cfg.duty_cycle = 0.01;
  CHECK(cfg.idle_shots() == 39600);
  ControlParameterSet p({0.0}, {0.0}, {1.0});
  DriftProcess d(DriftSpec::random_walk(0.001), 1);
  TrajectoryRng rng(54, 0);
  cfg.duty_cycle = 0.5;
  RabiCycleResult res = rabi_calibration_cycle(p, NoiseModel{}, d, cfg, rng);
  CHECK(res.idle_shots == 400);
  CHECK(d.t() == res.calibration_shots + res.idle_shots);
  cfg.duty_cycle = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
