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

#include "fastcal/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace fastcal {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  std::size_t w = static_cast<std::size_t>(std::max(1, workers));
  w = std::min(w, std::max<std::size_t>(n, 1));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < w; ++k) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(n);
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<double> OffsetSpec::draw(std::size_t n_params, RngStream& rng) const {
  std::vector<double> out(n_params);
  for (std::size_t i = 0; i < n_params; ++i) {
    if (uniform) {
      out[i] = lo + (hi - lo) * rng.uniform();
    } else if (fixed.size() == n_params) {
      out[i] = fixed[i];
    } else if (fixed.size() == 1) {
      out[i] = fixed[0];
    } else {
      throw std::invalid_argument("offset list length does not match parameter count");
    }
  }
  return out;
}

void RunSpec::validate() const {
  if (trajectories < 1) throw std::invalid_argument("trajectories must be >= 1");
  if (shots < 1) throw std::invalid_argument("shots must be >= 1");
  if (stride < 1) throw std::invalid_argument("record_stride must be >= 1");
  if (!(noise.p_gate >= 0.0 && noise.p_gate <= 1.0)) throw std::invalid_argument("noise.p must be in [0, 1]");
  if (!(noise.p_spam >= 0.0 && noise.p_spam <= 1.0)) throw std::invalid_argument("noise.p_spam must be in [0, 1]");
  if (idle_per_shot < 0) throw std::invalid_argument("idle shots must be >= 0");
  if (offset.uniform && !(offset.lo <= offset.hi)) throw std::invalid_argument("offset bounds must be ordered");
  drift.validate();
}

ControlParameterSet RunSpec::initial_params(std::size_t n_params, std::uint64_t trajectory) const {
  RngStream rng = RngStream(seed, trajectory).split(3);
  std::vector<double> d = offset.draw(n_params, rng);
  ControlParameterSet p = ControlParameterSet::with_offsets(d);
  if (alpha.size() == n_params) {
    p.alpha = alpha;
  } else if (alpha.size() == 1) {
    p.alpha.assign(n_params, alpha[0]);
  } else {
    throw std::invalid_argument("alpha list length does not match parameter count");
  }
  p.validate();
  return p;
}

double gx_infidelity(const ControlParameterSet& params, InfidelityKind kind, double p_gate) {
  double delta = params.rotation_error(0);
  return kind == InfidelityKind::process ? gx_process_infidelity(delta, p_gate) : gx_unitary_infidelity(delta);
}

double gxgy_infidelity(const ControlParameterSet& params) {
  double theta = params.rotation_error(0), phi = params.rotation_error(1);
  double ix = entanglement_infidelity_unitary(build_gx({theta}), build_gx({0.0}));
  double iy = entanglement_infidelity_unitary(build_gy({theta, phi}), build_gy({0.0, 0.0}));
  return 0.5 * (ix + iy);
}

double cz_infidelity(const ControlParameterSet& params) {
  return entanglement_infidelity_unitary(
      build_cz({params.rotation_error(0), params.rotation_error(1), params.rotation_error(2)}), build_cz({}));
}

namespace {

/// Idle period: drift only, every shot observed.
template <class Drift>
void idle(std::int64_t count, std::int64_t& t, ControlParameterSet& params, Drift& drift, TrajectoryRng& rng,
          TrajectoryRecord& rec, double g, int r, const std::function<double(const ControlParameterSet&)>& inf) {
  for (std::int64_t k = 0; k < count; ++k) {
    if (!drift.is_static()) drift.step(params.eta_opt, rng.drift);
    ++t;
    rec.observe(t, params, -1, g, r, inf(params), 0);
  }
}

}  // namespace

std::vector<TrajectoryRecord> run_ioc_single(const RunSpec& spec, const IocSettings& settings) {
  spec.validate();
  settings.validate();
  std::vector<TrajectoryRecord> out(static_cast<std::size_t>(spec.trajectories));
  parallel_for(out.size(), spec.workers, [&](std::size_t i) {
    TrajectoryRng rng(spec.seed, i);
    IocSingleEngine eng(settings, spec.initial_params(1, i), spec.drift, spec.noise);
    auto inf = [&](const ControlParameterSet& p) { return gx_infidelity(p, spec.infidelity, spec.noise.p_gate); };
    DriftProcess idle_drift(spec.drift, 1);
    TrajectoryRecord rec(1, spec.stride);
    const IocState& st = eng.state();
    rec.observe(0, st.params, -1, st.g, st.r, inf(st.params), 0);
    std::int64_t t = 0;
    while (t < spec.shots) {
      IocStepResult res = eng.step(rng);
      ++t;
      std::uint8_t fl = (res.updated ? kFlagUpdate : 0) | (res.schedule.changed() ? kFlagSchedule : 0);
      rec.observe(t, st.params, res.z > 0 ? 0 : 1, st.g, st.r, inf(st.params), fl);
      std::int64_t n_idle = std::min(spec.idle_per_shot, spec.shots - t);
      idle(n_idle, t, eng.mutable_state().params, idle_drift, rng, rec, st.g, st.r, inf);
    }
    out[i] = std::move(rec);
  });
  return out;
}

std::vector<TrajectoryRecord> run_ioc_multi(const RunSpec& spec, const IocMultiSettings& settings,
                                            const std::vector<Circuit>& circuits,
                                            const std::function<double(const ControlParameterSet&)>& infidelity) {
  spec.validate();
  settings.validate();
  if (circuits.empty()) throw std::invalid_argument("multi-parameter IOC needs circuits");
  std::size_t m = static_cast<std::size_t>(std::max(circuits[0].max_param_index(), 0) + 1);
  for (const Circuit& c : circuits) m = std::max(m, static_cast<std::size_t>(c.max_param_index() + 1));
  std::vector<TrajectoryRecord> out(static_cast<std::size_t>(spec.trajectories));
  parallel_for(out.size(), spec.workers, [&](std::size_t i) {
    TrajectoryRng rng(spec.seed, i);
    IocMultiEngine eng(settings, circuits, spec.initial_params(m, i), spec.drift, spec.noise);
    TrajectoryRecord rec(m, spec.stride);
    rec.observe(0, eng.params(), -1, settings.g, settings.r, infidelity(eng.params()), 0);
    for (std::int64_t t = 1; t <= spec.shots; ++t) {
      IocMultiStepResult res = eng.step(rng);
      std::uint8_t fl = (res.updated ? kFlagUpdate : 0) | (res.skipped ? kFlagSkipped : 0);
      rec.observe(t, eng.params(), static_cast<std::int64_t>(res.corrected), settings.g, settings.r,
                  infidelity(eng.params()), fl);
    }
    out[i] = std::move(rec);
  });
  return out;
}

std::vector<TrajectoryRecord> run_doc_single(const RunSpec& spec, const DocSettings& settings) {
  spec.validate();
  settings.validate();
  std::vector<TrajectoryRecord> out(static_cast<std::size_t>(spec.trajectories));
  parallel_for(out.size(), spec.workers, [&](std::size_t i) {
    TrajectoryRng rng(spec.seed, i);
    DocSingleEngine eng(settings, spec.initial_params(1, i), spec.drift, spec.noise);
    auto inf = [&](const ControlParameterSet& p) { return gx_infidelity(p, spec.infidelity, spec.noise.p_gate); };
    DriftProcess idle_drift(spec.drift, 1);
    TrajectoryRecord rec(1, spec.stride);
    const DocState& st = eng.state();
    rec.observe(0, st.params, -1, 0.0, st.r, inf(st.params), 0);
    std::int64_t t = 0;
    while (t < spec.shots) {
      DocStepResult res = eng.step(rng);
      ++t;
      std::uint8_t fl = (res.event.update ? kFlagUpdate : 0) | (res.event.abort ? kFlagAbort : 0) |
                        (res.event.r_after != res.event.r_before ? kFlagSchedule : 0);
      rec.observe(t, st.params, static_cast<std::int64_t>(res.raw), 0.0, st.r, inf(st.params), fl);
      std::int64_t n_idle = std::min(spec.idle_per_shot, spec.shots - t);
      idle(n_idle, t, eng.mutable_state().params, idle_drift, rng, rec, 0.0, st.r, inf);
    }
    out[i] = std::move(rec);
  });
  return out;
}

std::vector<TrajectoryRecord> run_qec(const RunSpec& spec, const QecSettings& settings) {
  spec.validate();
  settings.validate();
  std::vector<TrajectoryRecord> out(static_cast<std::size_t>(spec.trajectories));
  parallel_for(out.size(), spec.workers, [&](std::size_t i) {
    TrajectoryRng rng(spec.seed, i);
    QecSettings s = settings;
    s.drift = spec.drift;
    QecEngine eng(s);
    TrajectoryRecord rec(kIdleParams, spec.stride);
    rec.observe(0, eng.params(), -1, 0.0, 0, 1.0 - survival_probability(eng.state()), 0);
    for (std::int64_t t = 1; t <= spec.shots; ++t) {
      QecRoundRecord r = eng.round(rng);
      std::uint8_t fl = r.updates > 0 ? kFlagUpdate : 0;
      rec.observe(t, eng.params(), r.syndrome, 0.0, 0, 1.0 - r.survival, fl);
    }
    out[i] = std::move(rec);
  });
  return out;
}

std::vector<TrajectoryRecord> run_rabi(const RunSpec& spec, const RabiConfig& cfg) {
  spec.validate();
  cfg.validate();
  std::vector<TrajectoryRecord> out(static_cast<std::size_t>(spec.trajectories));
  parallel_for(out.size(), spec.workers, [&](std::size_t i) {
    TrajectoryRng rng(spec.seed, i);
    ControlParameterSet params = spec.initial_params(1, i);
    DriftProcess drift(spec.drift, 1);
    TrajectoryRecord rec(1, spec.stride);
    auto inf = [&](const ControlParameterSet& p) { return gx_infidelity(p, spec.infidelity, spec.noise.p_gate); };
    rec.observe(0, params, -1, 0.0, cfg.r_points, inf(params), 0);
    std::int64_t t = 0;
    bool pending_update = false;
    ShotHook hook = [&](const ControlParameterSet& p) {
      if (t >= spec.shots) return;
      ++t;
      rec.observe(t, p, -1, 0.0, cfg.r_points, inf(p), pending_update ? kFlagUpdate : 0);
      pending_update = false;
    };
    while (t < spec.shots) {
      // Data collection and idling both report through the hook; the
      // correction lands between them.
      std::vector<RabiPoint> data = collect_rabi_data(params, spec.noise, drift, cfg, rng, hook);
      FitResult fit = fit_rabi(data, cfg);
      if (fit.usable()) {
        params.eta[0] += (std::numbers::pi / 2 - fit.theta_est) / params.alpha[0];
        pending_update = true;
      }
      std::int64_t n_idle = std::min(cfg.idle_shots(), spec.shots - t);
      for (std::int64_t k = 0; k < n_idle; ++k) {
        if (!drift.is_static()) drift.step(params.eta_opt, rng.drift);
        hook(params);
      }
    }
    out[i] = std::move(rec);
  });
  return out;
}

std::vector<TrajectoryRecord> run_uncalibrated(const RunSpec& spec, std::size_t n_params,
                                               const std::function<double(const ControlParameterSet&)>& infidelity) {
  spec.validate();
  std::vector<TrajectoryRecord> out(static_cast<std::size_t>(spec.trajectories));
  parallel_for(out.size(), spec.workers, [&](std::size_t i) {
    TrajectoryRng rng(spec.seed, i);
    ControlParameterSet params = spec.initial_params(n_params, i);
    DriftProcess drift(spec.drift, n_params);
    TrajectoryRecord rec(n_params, spec.stride);
    rec.observe(0, params, -1, 0.0, 0, infidelity(params), 0);
    std::int64_t t = 0;
    idle(spec.shots, t, params, drift, rng, rec, 0.0, 0, infidelity);
    out[i] = std::move(rec);
  });
  return out;
}

double duty_cycle_ioc_gain(std::int64_t idle_shots, double l, int r) {
  return std::sqrt(static_cast<double>(idle_shots) + 1.0) * l * r;
}

std::int64_t single_shot_idle(double d) {
  if (!(d > 0.0 && d <= 1.0)) throw std::invalid_argument("duty cycle must be in (0, 1]");
  return std::llround(1.0 / d - 1.0);
}

}  // namespace fastcal
