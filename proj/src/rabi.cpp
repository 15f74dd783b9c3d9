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

#include "fastcal/rabi.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace fastcal {

void RabiConfig::validate() const {
  if (r_points < 4) throw std::invalid_argument("rabi.r_points must be >= 4");
  if (n_batch < 1) throw std::invalid_argument("rabi.n_batch must be >= 1");
  if (!(a_lo <= a_hi && b_lo <= b_hi && theta_lo <= theta_hi && c_lo <= c_hi)) {
    throw std::invalid_argument("rabi bounds must be ordered");
  }
  if (!(duty_cycle > 0.0 && duty_cycle <= 1.0)) throw std::invalid_argument("rabi.duty_cycle must be in (0, 1]");
  if (starts < 1) throw std::invalid_argument("rabi.starts must be >= 1");
}

std::int64_t RabiConfig::idle_shots() const {
  return std::llround(static_cast<double>(calibration_shots()) * (1.0 / duty_cycle - 1.0));
}

double rabi_model(double a, double b, double theta, double c, int r) {
  double s = std::sin(0.5 * theta * r);
  return a * std::pow(b, r) * s * s + c;
}

std::vector<RabiPoint> collect_rabi_data(ControlParameterSet& params, const NoiseModel& noise, DriftProcess& drift,
                                         const RabiConfig& cfg, TrajectoryRng& rng, const ShotHook& hook) {
  cfg.validate();
  std::vector<RabiPoint> data;
  CircuitRunner runner(1);
  for (int r = 0; r < cfg.r_points; ++r) {
    Circuit c;
    if (r > 0) {
      c = circuits::gx_power(r);
    } else {
      c.name = "spam_only";
    }
    int ones = 0;
    for (int k = 0; k < cfg.n_batch; ++k) {
      ones += runner.run(c, params, noise, rng.shots) == 1u ? 1 : 0;
      if (!drift.is_static()) drift.step(params.eta_opt, rng.drift);
      if (hook) hook(params);
    }
    data.push_back({r, static_cast<double>(ones) / cfg.n_batch, cfg.n_batch});
  }
  return data;
}

namespace {

using Vec4 = Eigen::Vector4d;

struct Box {
  Vec4 lo, hi;
  Vec4 clamp(const Vec4& x) const { return x.cwiseMax(lo).cwiseMin(hi); }
};

double cost(const std::vector<RabiPoint>& data, const Vec4& x) {
  double acc = 0.0;
  for (const RabiPoint& p : data) {
    double e = rabi_model(x(0), x(1), x(2), x(3), p.r) - p.frequency;
    acc += e * e;
  }
  return acc;
}

/// Projected Levenberg-Marquardt from one start; returns (x, cost).
std::pair<Vec4, double> lm_fit(const std::vector<RabiPoint>& data, Vec4 x, const Box& box) {
  const std::size_t n = data.size();
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), 4);
  Eigen::VectorXd res(static_cast<Eigen::Index>(n));
  double lambda = 1e-3;
  double f = cost(data, x);
  for (int iter = 0; iter < 300; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      const RabiPoint& p = data[i];
      double r = p.r;
      double half = 0.5 * x(2) * r;
      double s2 = std::sin(half) * std::sin(half);
      double br = std::pow(x(1), r);
      auto row = static_cast<Eigen::Index>(i);
      jac(row, 0) = br * s2;
      jac(row, 1) = r > 0 ? x(0) * r * std::pow(x(1), r - 1) * s2 : 0.0;
      jac(row, 2) = x(0) * br * 0.5 * r * std::sin(x(2) * r);
      jac(row, 3) = 1.0;
      res(row) = x(0) * br * s2 + x(3) - p.frequency;
    }
    Eigen::Matrix4d jtj = jac.transpose() * jac;
    Vec4 grad = jac.transpose() * res;
    // Free variables only: drop coordinates pinned at a bound with the gradient pushing outward.
    std::array<bool, 4> active{};
    for (int k = 0; k < 4; ++k) {
      active[static_cast<std::size_t>(k)] = (x(k) <= box.lo(k) && grad(k) > 0.0) || (x(k) >= box.hi(k) && grad(k) < 0.0);
    }
    bool improved = false;
    while (lambda < 1e12) {
      Eigen::Matrix4d a = jtj;
      for (int k = 0; k < 4; ++k) a(k, k) += lambda * (jtj(k, k) + 1e-12);
      Vec4 g = grad;
      for (int k = 0; k < 4; ++k) {
        if (active[static_cast<std::size_t>(k)]) {
          a.row(k).setZero();
          a.col(k).setZero();
          a(k, k) = 1.0;
          g(k) = 0.0;
        }
      }
      Vec4 step = a.ldlt().solve(-g);
      Vec4 cand = box.clamp(x + step);
      double fc = cost(data, cand);
      if (std::isfinite(fc) && fc < f) {
        double rel = (f - fc) / std::max(f, 1e-300);
        double move = (cand - x).norm();
        x = cand;
        f = fc;
        lambda = std::max(lambda / 3.0, 1e-12);
        improved = true;
        if (rel < 1e-12 || move < 1e-12) return {x, f};
        break;
      }
      lambda *= 4.0;
    }
    if (!improved) break;
  }
  return {x, f};
}

}  // namespace

FitResult fit_rabi(const std::vector<RabiPoint>& data, const RabiConfig& cfg) {
  cfg.validate();
  if (data.size() < 4) throw std::invalid_argument("fit_rabi needs at least 4 points");
  FitResult out;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const RabiPoint& p : data) {
    lo = std::min(lo, p.frequency);
    hi = std::max(hi, p.frequency);
  }
  Box box{Vec4(cfg.a_lo, cfg.b_lo, cfg.theta_lo, cfg.c_lo), Vec4(cfg.a_hi, cfg.b_hi, cfg.theta_hi, cfg.c_hi)};
  double best = std::numeric_limits<double>::infinity();
  Vec4 best_x = box.clamp(0.5 * (box.lo + box.hi));
  for (int k = 0; k < cfg.starts; ++k) {
    double frac = static_cast<double>(k + 1) / (cfg.starts + 1);
    Vec4 x0(0.5 * (cfg.a_lo + cfg.a_hi), 0.5 * (cfg.b_lo + cfg.b_hi),
            cfg.theta_lo + frac * (cfg.theta_hi - cfg.theta_lo), std::clamp(lo, cfg.c_lo, cfg.c_hi));
    auto [x, f] = lm_fit(data, x0, box);
    if (f < best) {
      best = f;
      best_x = x;
    }
  }
  out.a = best_x(0);
  out.b = best_x(1);
  out.theta_est = best_x(2);
  out.c = best_x(3);
  out.residual_norm = std::sqrt(best);
  out.converged = std::isfinite(best);
  out.degenerate = (hi - lo) < cfg.degenerate_range;
  return out;
}

RabiCycleResult rabi_calibration_cycle(ControlParameterSet& params, const NoiseModel& noise, DriftProcess& drift,
                                       const RabiConfig& cfg, TrajectoryRng& rng, const ShotHook& hook) {
  RabiCycleResult res;
  std::vector<RabiPoint> data = collect_rabi_data(params, noise, drift, cfg, rng, hook);
  res.calibration_shots = cfg.calibration_shots();
  res.fit = fit_rabi(data, cfg);
  if (res.fit.usable()) {
    res.correction = (std::numbers::pi / 2 - res.fit.theta_est) / params.alpha[0];
    params.eta[0] += res.correction;
    res.updated = true;
  }
  res.idle_shots = cfg.idle_shots();
  for (std::int64_t k = 0; k < res.idle_shots; ++k) {
    if (!drift.is_static()) drift.step(params.eta_opt, rng.drift);
    if (hook) hook(params);
  }
  return res;
}

}  // namespace fastcal
