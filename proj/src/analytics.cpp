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

#include "fastcal/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fastcal {

double predict_mean(double mu0, double g, double t) { return std::pow(1.0 - 2.0 * g, t) * mu0; }

double predict_mean_continuous(double mu0, double g, double t) { return mu0 * std::exp(-2.0 * g * t); }

double predict_variance(double sigma0_sq, double mu0, double g, double s, double l, std::int64_t t) {
  if (t <= 0) return sigma0_sq;
  if (g == 0.0) return sigma0_sq + static_cast<double>(t) * l * l;
  double stat = stationary_variance(g, s, l);
  double decay = 1.0 - 4.0 * g;
  return (sigma0_sq - stat) * std::pow(decay, static_cast<double>(t)) + stat -
         4.0 * g * g * std::pow(decay, static_cast<double>(t - 1)) * mu0 * mu0;
}

double predict_variance_recursive(double sigma0_sq, double mu0, double g, double s, double l, std::int64_t t) {
  double var = sigma0_sq, mu = mu0;
  for (std::int64_t k = 0; k < t; ++k) {
    var = var + g * g / (s * s) + l * l - 4.0 * g * var - 4.0 * g * g * mu * mu;
    mu *= 1.0 - 2.0 * g;
  }
  return var;
}

double predict_variance_continuous(double sigma0_sq, double g, double s, double l, double t) {
  if (g == 0.0) return sigma0_sq + t * l * l;
  double stat = stationary_variance(g, s, l);
  return (sigma0_sq - stat) * std::exp(-4.0 * g * t) + stat;
}

double stationary_variance(double g, double s, double l) {
  if (!(g > 0.0)) throw std::invalid_argument("stationary variance needs g > 0");
  return g / (4.0 * s * s) + l * l / (4.0 * g);
}

double optimal_gain(double l, double s) {
  if (l < 0.0 || s < 0.0) throw std::invalid_argument("optimal_gain needs l, s >= 0");
  return l * s;
}

double minimum_stationary_variance(double l, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("minimum_stationary_variance needs s > 0");
  return l / (2.0 * s);
}

double exact_gain_schedule(double variance, double mean, double s) {
  double denom = 1.0 - 4.0 * s * s * mean * mean;
  if (!(denom > 0.0)) throw std::domain_error("gain schedule denominator is not positive");
  return 2.0 * variance * s * s / denom;
}

int autocorrelation_sum(std::span<const int> record, std::size_t h) {
  if (h < 1 || record.size() < h) throw std::invalid_argument("autocorrelation needs at least h entries");
  std::size_t start = record.size() - h;
  int a = 0;
  for (std::size_t i = start + 1; i < record.size(); ++i) a += record[i] * record[i - 1];
  return a;
}

double duty_cycle(double t_c, double t_e) {
  if (t_c < 0.0 || t_e < 0.0 || (t_c == 0.0 && t_e == 0.0)) {
    throw std::invalid_argument("duty_cycle needs non-negative times, not both zero");
  }
  return t_c / (t_c + t_e);
}

TrajectoryRecord::TrajectoryRecord(std::size_t n, std::int64_t s) : n_params(n), stride(std::max<std::int64_t>(s, 1)) {}

void TrajectoryRecord::observe(std::int64_t shot, const ControlParameterSet& params, std::int64_t out, double g,
                               int r, double infid, std::uint8_t fl) {
  pending_flags |= fl;
  if (fl & kFlagUpdate) ++updates;
  if (fl & kFlagAbort) ++aborts;
  if (shot > 0) {
    infidelity_sum += infid;
    ++shots;
  }
  if (shot % stride != 0) return;
  t.push_back(shot);
  for (std::size_t i = 0; i < n_params; ++i) {
    eta.push_back(params.eta[i]);
    eta_opt.push_back(params.eta_opt[i]);
  }
  outcome.push_back(out);
  gain.push_back(g);
  reps.push_back(r);
  infidelity.push_back(infid);
  flags.push_back(pending_flags);
  pending_flags = 0;
}

Quantiles quantiles(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("quantiles of an empty set");
  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    double pos = p * static_cast<double>(v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
  };
  return {q(0.25), q(0.5), q(0.75)};
}

double SummaryStats::stderr_delta(std::size_t param, std::size_t row) const {
  if (trajectories < 2) return 0.0;
  return std::sqrt(var_delta[param][row] / static_cast<double>(trajectories));
}

double SummaryStats::window_mean_variance(std::size_t param, std::size_t from, std::size_t to) const {
  if (from >= to || to > t.size()) throw std::out_of_range("invalid row window");
  double acc = 0.0;
  for (std::size_t i = from; i < to; ++i) acc += var_delta[param][i];
  return acc / static_cast<double>(to - from);
}

double SummaryStats::window_mean_abs(std::size_t param, std::size_t from, std::size_t to) const {
  if (from >= to || to > t.size()) throw std::out_of_range("invalid row window");
  double acc = 0.0;
  for (std::size_t i = from; i < to; ++i) acc += mean_abs_delta[param][i];
  return acc / static_cast<double>(to - from);
}

std::size_t SummaryStats::row_of(std::int64_t shot) const {
  auto it = std::lower_bound(t.begin(), t.end(), shot);
  if (it == t.end() || *it != shot) throw std::out_of_range("shot not recorded");
  return static_cast<std::size_t>(it - t.begin());
}

SummaryStats summarize(const std::vector<TrajectoryRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize needs at least one trajectory");
  const TrajectoryRecord& first = records.front();
  const std::size_t rows = first.rows();
  const std::size_t m = first.n_params;
  for (const TrajectoryRecord& r : records) {
    if (r.rows() != rows || r.n_params != m || r.t != first.t) {
      throw std::invalid_argument("trajectories have mismatched row schedules");
    }
  }
  SummaryStats out;
  out.trajectories = records.size();
  out.t = first.t;
  const double n = static_cast<double>(records.size());
  out.mean_delta.assign(m, std::vector<double>(rows, 0.0));
  out.var_delta.assign(m, std::vector<double>(rows, 0.0));
  out.mean_abs_delta.assign(m, std::vector<double>(rows, 0.0));
  out.mean_infidelity.assign(rows, 0.0);
  out.sd_infidelity.assign(rows, 0.0);
  out.mean_gain.assign(rows, 0.0);
  out.mean_reps.assign(rows, 0.0);
  for (std::size_t p = 0; p < m; ++p) {
    for (std::size_t i = 0; i < rows; ++i) {
      double sum = 0.0, abs_sum = 0.0;
      for (const TrajectoryRecord& r : records) {
        double d = r.delta_eta(i, p);
        sum += d;
        abs_sum += std::abs(d);
      }
      double mean = sum / n;
      double ss = 0.0;
      for (const TrajectoryRecord& r : records) {
        double d = r.delta_eta(i, p) - mean;
        ss += d * d;
      }
      out.mean_delta[p][i] = mean;
      out.var_delta[p][i] = records.size() > 1 ? ss / (n - 1.0) : 0.0;
      out.mean_abs_delta[p][i] = abs_sum / n;
    }
  }
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0, g = 0.0, rr = 0.0;
    for (const TrajectoryRecord& r : records) {
      s += r.infidelity[i];
      g += r.gain[i];
      rr += r.reps[i];
    }
    double mean = s / n;
    double ss = 0.0;
    for (const TrajectoryRecord& r : records) ss += (r.infidelity[i] - mean) * (r.infidelity[i] - mean);
    out.mean_infidelity[i] = mean;
    out.sd_infidelity[i] = records.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    out.mean_gain[i] = g / n;
    out.mean_reps[i] = rr / n;
  }
  for (const TrajectoryRecord& r : records) out.experiment_mean_infidelity.push_back(r.mean_infidelity());
  out.experiment_infidelity = quantiles(out.experiment_mean_infidelity);
  return out;
}

}  // namespace fastcal
