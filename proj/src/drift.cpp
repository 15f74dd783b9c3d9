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

#include "fastcal/drift.hpp"

#include <cmath>
#include <stdexcept>

namespace fastcal {

std::string to_string(DriftKind kind) {
  switch (kind) {
    case DriftKind::none: return "none";
    case DriftKind::random_walk: return "random_walk";
    case DriftKind::ornstein_uhlenbeck: return "ornstein_uhlenbeck";
    case DriftKind::jump: return "jump";
    case DriftKind::one_over_f: return "one_over_f";
    case DriftKind::composite: return "composite";
  }
  return "none";
}

DriftKind drift_kind_from_string(const std::string& name) {
  for (DriftKind k : {DriftKind::none, DriftKind::random_walk, DriftKind::ornstein_uhlenbeck,
                      DriftKind::jump, DriftKind::one_over_f, DriftKind::composite}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown drift kind '" + name + "'");
}

DriftSpec DriftSpec::random_walk(double step) {
  DriftSpec s;
  s.kind = DriftKind::random_walk;
  s.step = step;
  return s;
}

DriftSpec DriftSpec::ornstein_uhlenbeck(double reversion, double volatility, double mean) {
  DriftSpec s;
  s.kind = DriftKind::ornstein_uhlenbeck;
  s.reversion = reversion;
  s.volatility = volatility;
  s.mean = mean;
  return s;
}

DriftSpec DriftSpec::jump(std::int64_t shot, double magnitude) {
  DriftSpec s;
  s.kind = DriftKind::jump;
  s.jump_shot = shot;
  s.jump_magnitude = magnitude;
  return s;
}

DriftSpec DriftSpec::one_over_f(double scale, int components) {
  DriftSpec s;
  s.kind = DriftKind::one_over_f;
  s.scale = scale;
  s.components = components;
  return s;
}

DriftSpec DriftSpec::composite(std::vector<DriftSpec> parts) {
  DriftSpec s;
  s.kind = DriftKind::composite;
  s.parts = std::move(parts);
  return s;
}

void DriftSpec::validate() const {
  switch (kind) {
    case DriftKind::none: break;
    case DriftKind::random_walk:
      if (!(step >= 0.0)) throw std::invalid_argument("drift.step must be >= 0");
      break;
    case DriftKind::ornstein_uhlenbeck:
      if (!(reversion >= 0.0)) throw std::invalid_argument("drift.reversion must be >= 0");
      if (!(volatility >= 0.0)) throw std::invalid_argument("drift.volatility must be >= 0");
      break;
    case DriftKind::jump:
      if (jump_shot < 1) throw std::invalid_argument("drift.jump_shot must be >= 1");
      break;
    case DriftKind::one_over_f:
      if (components < 1) throw std::invalid_argument("drift.components must be >= 1");
      break;
    case DriftKind::composite:
      for (const DriftSpec& p : parts) p.validate();
      break;
  }
}

OneOverFCoefficients one_over_f_coefficients(int components) {
  OneOverFCoefficients c;
  for (int i = 1; i <= components; ++i) {
    double a = 10.0 * std::pow(0.25, i);
    c.reversion.push_back(a);
    c.volatility.push_back(std::pow(2.0, i) * (1.0 - std::exp(-2.0 * a)));
  }
  return c;
}

DriftProcess::DriftProcess(DriftSpec spec, std::size_t n_params)
    : spec_(std::move(spec)), n_params_(n_params) {
  spec_.validate();
  flatten(spec_);
  for (const Leaf& leaf : leaves_) {
    std::size_t width = leaf.spec.kind == DriftKind::one_over_f ? leaf.decay.size() : 0;
    components_.emplace_back(width * n_params_, 0.0);
  }
}

void DriftProcess::flatten(const DriftSpec& spec) {
  switch (spec.kind) {
    case DriftKind::none: return;
    case DriftKind::composite:
      for (const DriftSpec& p : spec.parts) flatten(p);
      return;
    case DriftKind::random_walk:
      if (spec.step == 0.0) return;
      break;
    default: break;
  }
  Leaf leaf{spec, {}, {}};
  if (spec.kind == DriftKind::ornstein_uhlenbeck) {
    leaf.decay = {std::exp(-spec.reversion)};
  } else if (spec.kind == DriftKind::one_over_f) {
    OneOverFCoefficients c = one_over_f_coefficients(spec.components);
    for (double a : c.reversion) leaf.decay.push_back(std::exp(-a));
    leaf.noise = c.volatility;
  }
  leaves_.push_back(std::move(leaf));
}

void DriftProcess::step(std::span<double> eta_opt, RngStream& rng) {
  if (eta_opt.size() != n_params_) throw std::invalid_argument("drift parameter count mismatch");
  ++t_;
  for (std::size_t l = 0; l < leaves_.size(); ++l) {
    const Leaf& leaf = leaves_[l];
    const DriftSpec& s = leaf.spec;
    for (std::size_t i = 0; i < n_params_; ++i) {
      double& v = eta_opt[i];
      switch (s.kind) {
        case DriftKind::random_walk: v += rng.sign() * s.step; break;
        case DriftKind::ornstein_uhlenbeck:
          v = s.mean + (v - s.mean) * leaf.decay[0] + s.volatility * rng.normal();
          break;
        case DriftKind::jump:
          if (t_ == s.jump_shot) v += s.jump_magnitude;
          break;
        case DriftKind::one_over_f: {
          std::size_t width = leaf.decay.size();
          double* x = components_[l].data() + i * width;
          double delta = 0.0;
          for (std::size_t c = 0; c < width; ++c) {
            double next = x[c] * leaf.decay[c] + leaf.noise[c] * rng.normal();
            delta += next - x[c];
            x[c] = next;
          }
          v += s.scale * delta;
          break;
        }
        default: break;
      }
    }
  }
}

}  // namespace fastcal
