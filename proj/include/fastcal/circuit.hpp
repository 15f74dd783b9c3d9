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

#include <string>
#include <vector>

#include "fastcal/gates.hpp"
#include "fastcal/rng.hpp"
#include "fastcal/state_vector.hpp"

namespace fastcal {

enum class GateKind {
  gx,        // parametrized by one control (delta)
  gy,        // parametrized by two controls (theta, phi)
  cz,        // parametrized by three controls (zi, iz, zz)
  ideal_gx,  // Gx(0), noiseless
  ideal_h,   // Hadamard, noiseless
};

struct GateOp {
  GateKind kind = GateKind::gx;
  std::vector<int> qubits;
  /// Indices into the ControlParameterSet, in the gate's parameter order.
  std::vector<int> params;

  bool is_ideal() const { return kind == GateKind::ideal_gx || kind == GateKind::ideal_h; }
};

/// Gate sequence in execution order; the whole sequence is applied `repetitions` times.
struct Circuit {
  std::string name;
  int n_qubits = 1;
  std::vector<GateOp> ops;
  int repetitions = 1;
  /// Terminal ideal ops appended once after the repetitions (e.g. the SPAM flip).
  std::vector<GateOp> suffix;
  /// XOR mask that maps an outcome of this circuit back to its base family.
  Outcome outcome_flip = 0;

  std::size_t n_outcomes() const { return std::size_t{1} << n_qubits; }
  int max_param_index() const;
  void validate(std::size_t n_params) const;
};

struct NoiseModel {
  double p_gate = 0.0;  // depolarization after every non-ideal gate
  double p_spam = 0.0;  // depolarization on all qubits before measurement
};

namespace circuits {

/// (Gx)^r on one qubit controlled by parameter `param`.
Circuit gx_power(int r, int param = 0);
/// (Gx, Gy, Gx, Gy, Gx) as listed; controls (theta, phi) = (0, 1).
Circuit gxgy_c1(int repetitions = 1);
/// (Gx, Gx, Gy, Gx, Gy, Gx, Gy) as listed.
Circuit gxgy_c2(int repetitions = 1);
/// CZ, Gx_2, CZ, Gx_2, CZ, Gx_2, H_(1,2) as listed; controls (zi, iz, zz) = (0, 1, 2).
Circuit cz_c1(int repetitions = 1);
/// CZ, Gx_1, CZ, Gx_1, CZ, Gx_1, H_(1,2) as listed.
Circuit cz_c2(int repetitions = 1);
/// Built-in by name; gx_power takes `repetitions` as r.
Circuit by_name(const std::string& name, int repetitions = 1);

/// Builds a circuit from names listed in written order ("gx", "gy", "cz",
/// "gx1", "gx2", "h"); execution runs right to left.
Circuit from_listing(const std::string& name, const std::vector<std::string>& listing,
                     int n_qubits, int repetitions = 1);

}  // namespace circuits

/// The SPAM-robust partner: same circuit followed by two ideal Gx(0) on each
/// qubit, a deterministic bit flip. Outcomes of the partner are mapped back with outcome_flip.
Circuit with_terminal_flip(const Circuit& c);

/// Gate-for-gate unitary of a non-ideal or ideal op at the current parameters.
UnitaryMatrix gate_unitary(const GateOp& op, const ControlParameterSet& params);

/// Reusable executor; holds a workspace state so repeated shots do not allocate.
class CircuitRunner {
 public:
  explicit CircuitRunner(int n_qubits) : state_(n_qubits) {}

  /// One shot with per-gate and SPAM depolarization; returns the raw outcome.
  Outcome run(const Circuit& c, const ControlParameterSet& params, const NoiseModel& noise,
              RngStream& rng);
  /// Noiseless final state.
  const StateVector& evolve(const Circuit& c, const ControlParameterSet& params);

 private:
  void apply_ops(const Circuit& c, const ControlParameterSet& params, const NoiseModel* noise,
                 RngStream* rng);
  StateVector state_;
  std::vector<UnitaryMatrix> cache_;
};

/// One sampled shot (convenience wrapper around CircuitRunner).
Outcome run_circuit(const Circuit& c, const ControlParameterSet& params, const NoiseModel& noise,
                    RngStream& rng);
/// Exact noiseless Born distribution of the circuit output.
std::vector<double> circuit_distribution(const Circuit& c, const ControlParameterSet& params);

/// Closed form Pr(bit 1) for (Gx(delta))^r on |0>: (1 - cos(r(pi/2 + delta))) / 2.
double gx_power_probability_one(int r, double delta);

}  // namespace fastcal
