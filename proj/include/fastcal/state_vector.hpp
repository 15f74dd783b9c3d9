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

// Minimal statevector kernel. Qubit 0 is the most significant bit of a basis
// index, so kron(A, B) acts with A on qubit 0 and outcome strings read
// left to right as qubit 0, 1, ...

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fastcal/rng.hpp"

namespace fastcal {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Computational-basis outcome as a basis index (qubit 0 = most significant bit).
using Outcome = std::uint32_t;

std::string outcome_to_string(Outcome outcome, int n_qubits);

class StateVector {
 public:
  /// |0...0> on n_qubits.
  explicit StateVector(int n_qubits);
  static StateVector from_amplitudes(std::vector<Complex> amplitudes);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amps_.size(); }
  std::span<const Complex> amplitudes() const { return amps_; }
  std::span<Complex> mutable_amplitudes() { return amps_; }
  Complex operator[](std::size_t i) const { return amps_[i]; }

  double norm_squared() const;
  void normalize();
  /// Resets to |0...0> without reallocating.
  void reset();

 private:
  int n_qubits_;
  std::vector<Complex> amps_;
};

/// |<a|b>|, the global-phase-insensitive overlap.
double overlap_magnitude(const StateVector& a, const StateVector& b);

class UnitaryMatrix {
 public:
  /// Validates U^dagger U = I within tol.
  explicit UnitaryMatrix(ComplexMatrix m, double tol = 1e-10);
  static UnitaryMatrix identity(std::size_t dim);
  /// Skips the unitarity check; for constructors that are unitary by construction.
  static UnitaryMatrix unchecked(ComplexMatrix m);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }
  Complex operator()(std::size_t r, std::size_t c) const { return m_(r, c); }
  UnitaryMatrix adjoint() const { return unchecked(m_.adjoint()); }
  UnitaryMatrix operator*(const UnitaryMatrix& rhs) const { return unchecked(m_ * rhs.m_); }
  bool is_unitary(double tol = 1e-10) const;

 private:
  UnitaryMatrix() = default;
  ComplexMatrix m_;
};

UnitaryMatrix kron(const UnitaryMatrix& a, const UnitaryMatrix& b);

/// Tensor product of single-qubit Paulis, e.g. "XZZXI".
class PauliOperator {
 public:
  explicit PauliOperator(std::string label);

  const std::string& label() const { return label_; }
  int n_qubits() const { return static_cast<int>(label_.size()); }
  /// Bits flipped by the operator (X or Y positions), as a basis-index mask.
  Outcome x_mask() const { return x_mask_; }
  /// Bits picking up a sign (Z or Y positions).
  Outcome z_mask() const { return z_mask_; }
  int y_count() const { return y_count_; }

  bool commutes_with(const PauliOperator& other) const;
  PauliOperator operator*(const PauliOperator& other) const;  // phase dropped
  ComplexMatrix to_matrix() const;

  bool operator==(const PauliOperator& other) const { return label_ == other.label_; }

 private:
  std::string label_;
  Outcome x_mask_ = 0;
  Outcome z_mask_ = 0;
  int y_count_ = 0;
};

/// Applies u to the listed qubits; u.dim() must be 2^targets.size().
void apply_unitary(StateVector& state, const UnitaryMatrix& u, std::span<const int> targets);
void apply_unitary(StateVector& state, const UnitaryMatrix& u, std::initializer_list<int> targets);
/// Fast path for a single-qubit 2x2 matrix (row-major m00, m01, m10, m11).
void apply_single_qubit(StateVector& state, const Complex (&m)[4], int target);
/// Applies a Pauli acting on the whole register.
void apply_pauli(StateVector& state, const PauliOperator& pauli);
/// Applies the Pauli given by per-qubit codes (0=I, 1=X, 2=Y, 3=Z) on targets.
void apply_pauli_codes(StateVector& state, std::span<const int> targets, std::span<const int> codes);
/// <psi|P|psi>, real for Hermitian P.
double pauli_expectation(const StateVector& state, const PauliOperator& pauli);

/// Stochastic unraveling of rho -> p I/d + (1-p) rho on targets: with
/// probability p a uniformly random Pauli (identity included) is applied.
void apply_depolarizing(StateVector& state, double p, std::span<const int> targets, RngStream& rng);

/// Exact Born probabilities |amplitude|^2.
std::vector<double> outcome_distribution(const StateVector& state);
/// Samples a terminal measurement; throws on an unnormalized state.
Outcome measure_computational(const StateVector& state, RngStream& rng);

}  // namespace fastcal
