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

#include <array>
#include <cstdint>
#include <vector>

#include "fastcal/doc.hpp"
#include "fastcal/drift.hpp"
#include "fastcal/gates.hpp"
#include "fastcal/ioc.hpp"
#include "fastcal/state_vector.hpp"

namespace fastcal {

/// The [[5,1,3]] perfect code.
class StabilizerCode513 {
 public:
  StabilizerCode513();

  const std::array<PauliOperator, 4>& generators() const { return generators_; }
  const PauliOperator& logical_x() const { return logical_x_; }
  const PauliOperator& logical_z() const { return logical_z_; }

 private:
  std::array<PauliOperator, 4> generators_;
  PauliOperator logical_x_;
  PauliOperator logical_z_;
};

/// Single-qubit Pauli error on qubit j (0-based) along axis k (0=X, 1=Y, 2=Z).
struct PauliError {
  int qubit = 0;
  int axis = 0;
  int index() const { return 3 * qubit + axis; }
  PauliOperator as_operator(int n_qubits = 5) const;
};

/// 4-bit syndrome with S1 as the most significant bit; a bit is 1 when the
/// generator measures -1.
using Syndrome = std::uint8_t;

Syndrome syndrome_of(const StabilizerCode513& code, const PauliOperator& error);

class SyndromeTable {
 public:
  explicit SyndromeTable(const StabilizerCode513& code);

  /// Error for a nontrivial syndrome; throws for syndrome 0.
  PauliError lookup(Syndrome s) const;
  bool is_bijection() const;

 private:
  std::array<int, 16> index_{};  // error index or -1
};

StateVector encode_logical_zero();

/// Projective measurement of a Pauli observable; collapses the state and
/// returns +1 or -1.
int measure_stabilizer(StateVector& state, const PauliOperator& generator, RngStream& rng);

/// (<Z_L> + 1) / 2.
double survival_probability(const StateVector& state);

struct QecSettings {
  int n = 2;
  bool calibrate = true;
  bool recover = true;
  DriftSpec drift = DriftSpec::random_walk(1e-4);
  std::vector<double> initial_offsets = std::vector<double>(kIdleParams, 0.0);

  void validate() const;
};

struct QecRoundRecord {
  Syndrome syndrome = 0;
  int detected = -1;  // error index or -1
  int updates = 0;
  double survival = 1.0;
};

/// 15 parallel DOC calibrators, one per (qubit, axis).
struct DocBank {
  std::array<int, kIdleParams> coin{};
  std::array<int, kIdleParams> runs{};
  std::array<int, kIdleParams> failures{};

  DocBank() { coin.fill(1); }
};

/// One code-capacity realization. Order per round: drift, idle noise,
/// syndrome extraction, recovery, bank update.
class QecEngine {
 public:
  explicit QecEngine(QecSettings settings);

  QecRoundRecord round(TrajectoryRng& rng);
  const StateVector& state() const { return state_; }
  const ControlParameterSet& params() const { return params_; }
  const DocBank& bank() const { return bank_; }
  std::int64_t rounds() const { return rounds_; }

 private:
  QecSettings settings_;
  StabilizerCode513 code_;
  SyndromeTable table_;
  StateVector state_;
  ControlParameterSet params_;
  DriftProcess drift_;
  DocBank bank_;
  std::int64_t rounds_ = 0;
};

}  // namespace fastcal
