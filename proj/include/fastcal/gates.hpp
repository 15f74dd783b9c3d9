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
#include <span>
#include <vector>

#include "fastcal/state_vector.hpp"

namespace fastcal {

struct GxParams {
  double delta = 0.0;
};

struct GyParams {
  double theta = 0.0;
  double phi = 0.0;
};

struct CzParams {
  double theta_zi = 0.0;
  double theta_iz = 0.0;
  double theta_zz = 0.0;
};

/// Tunable controls, their hidden optima and couplings. Rotation error of
/// parameter i is alpha[i] * (eta[i] - eta_opt[i]).
struct ControlParameterSet {
  std::vector<double> eta;
  std::vector<double> eta_opt;
  std::vector<double> alpha;

  ControlParameterSet() = default;
  ControlParameterSet(std::vector<double> eta, std::vector<double> eta_opt, std::vector<double> alpha);
  /// m parameters with eta = 0, eta_opt = -offset and unit coupling.
  static ControlParameterSet with_offsets(std::span<const double> delta_eta);

  std::size_t size() const { return eta.size(); }
  double delta_eta(std::size_t i) const { return eta[i] - eta_opt[i]; }
  double rotation_error(std::size_t i) const { return alpha[i] * delta_eta(i); }
  std::vector<double> rotation_errors() const;
  void validate() const;
};

/// exp(i/2 (pi/2 + delta) sigma_x).
UnitaryMatrix build_gx(GxParams p);
/// exp(i/2 (pi/2 + theta)(sin(phi) sigma_x + cos(phi) sigma_y)).
UnitaryMatrix build_gy(GyParams p);
/// exp(i[pi/4 + (pi/4 + t_zz) ZZ - (pi/4 + t_iz) IZ - (pi/4 + t_zi) ZI]); qubit 0 is the left factor.
UnitaryMatrix build_cz(CzParams p);
UnitaryMatrix build_hadamard();

constexpr int kIdleQubits = 5;
constexpr int kIdleParams = 3 * kIdleQubits;

/// Per-qubit factors exp(-i sum_k d_k sigma_k) for the idle noise; deltas are
/// indexed 3*qubit + axis with axis 0=X, 1=Y, 2=Z.
std::array<UnitaryMatrix, kIdleQubits> idle_noise_factors(std::span<const double> deltas);
/// Full 32x32 idle-noise unitary.
UnitaryMatrix build_idle_noise(std::span<const double> deltas);
/// exp(-i n.sigma) for a single qubit.
UnitaryMatrix single_qubit_rotation(double nx, double ny, double nz);

/// 1 - |Tr(W^dagger V)|^2 / d^2.
double entanglement_infidelity_unitary(const UnitaryMatrix& w, const UnitaryMatrix& v);

/// Real Pauli-transfer matrix in the normalized Pauli basis.
using TransferMatrix = Eigen::MatrixXd;

TransferMatrix ptm_from_unitary(const UnitaryMatrix& u);
/// diag(1, 1-p, ..., 1-p) acting on n qubits jointly (global depolarizing).
TransferMatrix depolarizing_ptm(double p, int n_qubits);
/// 1 - Tr(channel * Lambda_target^{-1}) / d^2.
double process_infidelity(const TransferMatrix& channel, const UnitaryMatrix& target);

/// Closed-form process infidelity of Gx(delta) followed by depolarization p
/// against Gx(0): 1 - (1 + (1-p)(1 + 2cos(delta))) / 4.
double gx_process_infidelity(double delta, double p);
/// sin^2(delta / 2), the unitary infidelity of Gx(delta) against Gx(0).
double gx_unitary_infidelity(double delta);

}  // namespace fastcal
