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

#include "fastcal/qec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fastcal {

StabilizerCode513::StabilizerCode513()
    : generators_{PauliOperator("XZZXI"), PauliOperator("IXZZX"), PauliOperator("XIXZZ"),
                  PauliOperator("ZXIXZ")},
      logical_x_("XXXXX"),
      logical_z_("ZZZZZ") {}

PauliOperator PauliError::as_operator(int n_qubits) const {
  if (qubit < 0 || qubit >= n_qubits || axis < 0 || axis > 2) throw std::out_of_range("invalid Pauli error");
  std::string s(static_cast<std::size_t>(n_qubits), 'I');
  s[static_cast<std::size_t>(qubit)] = "XYZ"[axis];
  return PauliOperator(std::move(s));
}

Syndrome syndrome_of(const StabilizerCode513& code, const PauliOperator& error) {
  Syndrome s = 0;
  for (const PauliOperator& g : code.generators()) {
    s = static_cast<Syndrome>((s << 1) | (g.commutes_with(error) ? 0 : 1));
  }
  return s;
}

SyndromeTable::SyndromeTable(const StabilizerCode513& code) {
  index_.fill(-1);
  for (int j = 0; j < 5; ++j) {
    for (int k = 0; k < 3; ++k) {
      PauliError e{j, k};
      Syndrome s = syndrome_of(code, e.as_operator());
      if (s == 0 || index_[s] != -1) throw std::logic_error("syndrome table is not a bijection");
      index_[s] = e.index();
    }
  }
}

PauliError SyndromeTable::lookup(Syndrome s) const {
  if (s == 0 || s > 15 || index_[s] < 0) throw std::invalid_argument("no error for this syndrome");
  return PauliError{index_[s] / 3, index_[s] % 3};
}

bool SyndromeTable::is_bijection() const {
  std::array<bool, kIdleParams> seen{};
  for (int s = 1; s < 16; ++s) {
    int i = index_[static_cast<std::size_t>(s)];
    if (i < 0 || seen[static_cast<std::size_t>(i)]) return false;
    seen[static_cast<std::size_t>(i)] = true;
  }
  return index_[0] == -1;
}

namespace {

/// state <- (state + sign * G state) / 2, unnormalized.
void project(StateVector& state, const PauliOperator& g, int sign) {
  StateVector image = state;
  apply_pauli(image, g);
  auto a = state.mutable_amplitudes();
  auto b = image.amplitudes();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = 0.5 * (a[i] + static_cast<double>(sign) * b[i]);
}

}  // namespace

StateVector encode_logical_zero() {
  StabilizerCode513 code;
  StateVector s(5);
  for (const PauliOperator& g : code.generators()) project(s, g, +1);
  project(s, code.logical_z(), +1);
  s.normalize();
  return s;
}

int measure_stabilizer(StateVector& state, const PauliOperator& generator, RngStream& rng) {
  double expect = pauli_expectation(state, generator);
  double p_plus = std::clamp(0.5 * (1.0 + expect), 0.0, 1.0);
  int outcome;
  if (p_plus < 1e-14) {
    outcome = -1;
  } else if (1.0 - p_plus < 1e-14) {
    outcome = 1;
  } else {
    outcome = rng.uniform() < p_plus ? 1 : -1;
  }
  project(state, generator, outcome);
  state.normalize();
  return outcome;
}

double survival_probability(const StateVector& state) {
  static const PauliOperator z_l("ZZZZZ");
  return std::clamp(0.5 * (pauli_expectation(state, z_l) + 1.0), 0.0, 1.0);
}

void QecSettings::validate() const {
  if (n < 1) throw std::invalid_argument("qec.n must be >= 1");
  if (initial_offsets.size() != static_cast<std::size_t>(kIdleParams)) {
    throw std::invalid_argument("qec.initial_offsets needs 15 entries");
  }
  drift.validate();
}

QecEngine::QecEngine(QecSettings settings)
    : settings_(std::move(settings)), table_(code_), state_(encode_logical_zero()) {
  settings_.validate();
  params_ = ControlParameterSet::with_offsets(settings_.initial_offsets);
  drift_ = DriftProcess(settings_.drift, kIdleParams);
}

QecRoundRecord QecEngine::round(TrajectoryRng& rng) {
  QecRoundRecord rec;
  if (!drift_.is_static()) drift_.step(params_.eta_opt, rng.drift);
  std::vector<double> d = params_.rotation_errors();
  auto factors = idle_noise_factors(d);
  for (int j = 0; j < kIdleQubits; ++j) {
    const UnitaryMatrix& u = factors[static_cast<std::size_t>(j)];
    const Complex m[4] = {u(0, 0), u(0, 1), u(1, 0), u(1, 1)};
    apply_single_qubit(state_, m, j);
  }
  Syndrome s = 0;
  for (const PauliOperator& g : code_.generators()) {
    int v = measure_stabilizer(state_, g, rng.shots);
    s = static_cast<Syndrome>((s << 1) | (v < 0 ? 1 : 0));
  }
  rec.syndrome = s;
  if (s != 0) {
    PauliError e = table_.lookup(s);
    rec.detected = e.index();
    if (settings_.recover) apply_pauli(state_, e.as_operator());
    ++bank_.failures[static_cast<std::size_t>(e.index())];
  }
  for (int k = 0; k < kIdleParams; ++k) {
    auto i = static_cast<std::size_t>(k);
    ++bank_.runs[i];
    if (bank_.failures[i] >= settings_.n) {
      if (settings_.calibrate) {
        double step = std::sqrt(static_cast<double>(bank_.failures[i]) / bank_.runs[i]);
        params_.eta[i] += bank_.coin[i] * step;
        bank_.coin[i] = -bank_.coin[i];
        ++rec.updates;
      }
      bank_.runs[i] = 0;
      bank_.failures[i] = 0;
    }
  }
  rec.survival = survival_probability(state_);
  ++rounds_;
  return rec;
}

}  // namespace fastcal
