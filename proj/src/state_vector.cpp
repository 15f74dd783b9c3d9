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

#include "fastcal/state_vector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace fastcal {

namespace {

constexpr double kNormTol = 1e-9;

std::size_t checked_dim(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 20) {
    throw std::invalid_argument("n_qubits must be in [1, 20]");
  }
  return std::size_t{1} << n_qubits;
}

Outcome bit_of(int n_qubits, int q) { return Outcome{1} << (n_qubits - 1 - q); }

void check_targets(int n_qubits, std::span<const int> targets) {
  Outcome seen = 0;
  for (int q : targets) {
    if (q < 0 || q >= n_qubits) throw std::out_of_range("qubit index out of range");
    Outcome b = bit_of(n_qubits, q);
    if (seen & b) throw std::invalid_argument("duplicate target qubit");
    seen |= b;
  }
}

}  // namespace

std::string outcome_to_string(Outcome outcome, int n_qubits) {
  std::string s(static_cast<std::size_t>(n_qubits), '0');
  for (int q = 0; q < n_qubits; ++q) {
    if (outcome & bit_of(n_qubits, q)) s[static_cast<std::size_t>(q)] = '1';
  }
  return s;
}

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits), amps_(checked_dim(n_qubits)) {
  amps_[0] = 1.0;
}

StateVector StateVector::from_amplitudes(std::vector<Complex> amplitudes) {
  std::size_t d = amplitudes.size();
  if (d < 2 || !std::has_single_bit(d)) {
    throw std::invalid_argument("amplitude count must be a power of two >= 2");
  }
  StateVector s(std::countr_zero(d));
  s.amps_ = std::move(amplitudes);
  if (std::abs(s.norm_squared() - 1.0) > kNormTol) {
    throw std::invalid_argument("amplitudes are not normalized");
  }
  return s;
}

double StateVector::norm_squared() const {
  double acc = 0.0;
  for (const Complex& a : amps_) acc += std::norm(a);
  return acc;
}

void StateVector::normalize() {
  double n = std::sqrt(norm_squared());
  if (n == 0.0) throw std::domain_error("cannot normalize the zero vector");
  for (Complex& a : amps_) a /= n;
}

void StateVector::reset() {
  std::fill(amps_.begin(), amps_.end(), Complex{});
  amps_[0] = 1.0;
}

double overlap_magnitude(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch");
  Complex acc = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) acc += std::conj(a[i]) * b[i];
  return std::abs(acc);
}

UnitaryMatrix::UnitaryMatrix(ComplexMatrix m, double tol) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    throw std::invalid_argument("unitary must be square and non-empty");
  }
  if (!is_unitary(tol)) throw std::invalid_argument("matrix is not unitary");
}

UnitaryMatrix UnitaryMatrix::identity(std::size_t dim) {
  return unchecked(ComplexMatrix::Identity(static_cast<Eigen::Index>(dim),
                                           static_cast<Eigen::Index>(dim)));
}

UnitaryMatrix UnitaryMatrix::unchecked(ComplexMatrix m) {
  UnitaryMatrix u;
  u.m_ = std::move(m);
  return u;
}

bool UnitaryMatrix::is_unitary(double tol) const {
  ComplexMatrix p = m_.adjoint() * m_;
  ComplexMatrix id = ComplexMatrix::Identity(m_.rows(), m_.cols());
  return (p - id).cwiseAbs().maxCoeff() <= tol;
}

UnitaryMatrix kron(const UnitaryMatrix& a, const UnitaryMatrix& b) {
  const ComplexMatrix& x = a.matrix();
  const ComplexMatrix& y = b.matrix();
  ComplexMatrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    }
  }
  return UnitaryMatrix::unchecked(std::move(out));
}

PauliOperator::PauliOperator(std::string label) : label_(std::move(label)) {
  int n = n_qubits();
  if (n < 1 || n > 20) throw std::invalid_argument("Pauli label length must be in [1, 20]");
  for (int q = 0; q < n; ++q) {
    Outcome b = bit_of(n, q);
    switch (label_[static_cast<std::size_t>(q)]) {
      case 'I': break;
      case 'X': x_mask_ |= b; break;
      case 'Z': z_mask_ |= b; break;
      case 'Y':
        x_mask_ |= b;
        z_mask_ |= b;
        ++y_count_;
        break;
      default: throw std::invalid_argument("Pauli label must use only I, X, Y, Z");
    }
  }
}

bool PauliOperator::commutes_with(const PauliOperator& other) const {
  if (other.n_qubits() != n_qubits()) throw std::invalid_argument("Pauli size mismatch");
  int anti = std::popcount((x_mask_ & other.z_mask_) ^ (z_mask_ & other.x_mask_));
  return anti % 2 == 0;
}

PauliOperator PauliOperator::operator*(const PauliOperator& other) const {
  if (other.n_qubits() != n_qubits()) throw std::invalid_argument("Pauli size mismatch");
  int n = n_qubits();
  Outcome x = x_mask_ ^ other.x_mask_;
  Outcome z = z_mask_ ^ other.z_mask_;
  std::string out(static_cast<std::size_t>(n), 'I');
  for (int q = 0; q < n; ++q) {
    Outcome b = bit_of(n, q);
    bool xb = x & b, zb = z & b;
    out[static_cast<std::size_t>(q)] = xb ? (zb ? 'Y' : 'X') : (zb ? 'Z' : 'I');
  }
  return PauliOperator(std::move(out));
}

ComplexMatrix PauliOperator::to_matrix() const {
  std::size_t d = std::size_t{1} << n_qubits();
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  const Complex iy[4] = {1.0, Complex(0, 1), -1.0, Complex(0, -1)};
  for (std::size_t i = 0; i < d; ++i) {
    int sign = std::popcount(static_cast<Outcome>(i) & z_mask_) % 2 ? -1 : 1;
    std::size_t j = i ^ x_mask_;
    m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
        iy[y_count_ % 4] * static_cast<double>(sign);
  }
  return m;
}

void apply_single_qubit(StateVector& state, const Complex (&m)[4], int target) {
  int n = state.n_qubits();
  if (target < 0 || target >= n) throw std::out_of_range("qubit index out of range");
  auto amps = state.mutable_amplitudes();
  std::size_t stride = bit_of(n, target);
  std::size_t d = amps.size();
  for (std::size_t base = 0; base < d; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      Complex a0 = amps[i];
      Complex a1 = amps[i + stride];
      amps[i] = m[0] * a0 + m[1] * a1;
      amps[i + stride] = m[2] * a0 + m[3] * a1;
    }
  }
}

void apply_unitary(StateVector& state, const UnitaryMatrix& u, std::span<const int> targets) {
  int n = state.n_qubits();
  check_targets(n, targets);
  std::size_t k = targets.size();
  if (k == 0 || u.dim() != (std::size_t{1} << k)) {
    throw std::invalid_argument("unitary dimension does not match target count");
  }
  const ComplexMatrix& m = u.matrix();
  if (k == 1) {
    const Complex mm[4] = {m(0, 0), m(0, 1), m(1, 0), m(1, 1)};
    apply_single_qubit(state, mm, targets[0]);
    return;
  }
  // Local index bit (k-1-t) corresponds to targets[t], matching kron ordering.
  std::vector<Outcome> offs(u.dim(), 0);
  Outcome tmask = 0;
  for (std::size_t loc = 0; loc < u.dim(); ++loc) {
    Outcome off = 0;
    for (std::size_t t = 0; t < k; ++t) {
      if (loc & (std::size_t{1} << (k - 1 - t))) off |= bit_of(n, targets[t]);
    }
    offs[loc] = off;
  }
  for (int q : targets) tmask |= bit_of(n, q);
  auto amps = state.mutable_amplitudes();
  std::vector<Complex> in(u.dim()), out(u.dim());
  for (std::size_t base = 0; base < amps.size(); ++base) {
    if (base & tmask) continue;
    for (std::size_t loc = 0; loc < u.dim(); ++loc) in[loc] = amps[base | offs[loc]];
    for (std::size_t r = 0; r < u.dim(); ++r) {
      Complex acc = 0.0;
      for (std::size_t c = 0; c < u.dim(); ++c) {
        acc += m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * in[c];
      }
      out[r] = acc;
    }
    for (std::size_t loc = 0; loc < u.dim(); ++loc) amps[base | offs[loc]] = out[loc];
  }
}

void apply_unitary(StateVector& state, const UnitaryMatrix& u, std::initializer_list<int> targets) {
  apply_unitary(state, u, std::span<const int>(targets.begin(), targets.size()));
}

namespace {

void apply_pauli_masks(StateVector& state, Outcome x_mask, Outcome z_mask, int y_count) {
  const Complex iy[4] = {1.0, Complex(0, 1), -1.0, Complex(0, -1)};
  Complex phase = iy[y_count % 4];
  auto amps = state.mutable_amplitudes();
  if (z_mask != 0 || y_count % 4 != 0) {
    for (std::size_t i = 0; i < amps.size(); ++i) {
      bool neg = std::popcount(static_cast<Outcome>(i) & z_mask) % 2;
      amps[i] *= neg ? -phase : phase;
    }
  }
  if (x_mask != 0) {
    for (std::size_t i = 0; i < amps.size(); ++i) {
      std::size_t j = i ^ x_mask;
      if (j > i) std::swap(amps[i], amps[j]);
    }
  }
}

}  // namespace

void apply_pauli(StateVector& state, const PauliOperator& pauli) {
  if (pauli.n_qubits() != state.n_qubits()) {
    throw std::invalid_argument("Pauli size does not match register");
  }
  apply_pauli_masks(state, pauli.x_mask(), pauli.z_mask(), pauli.y_count());
}

void apply_pauli_codes(StateVector& state, std::span<const int> targets, std::span<const int> codes) {
  if (targets.size() != codes.size()) throw std::invalid_argument("targets/codes size mismatch");
  int n = state.n_qubits();
  check_targets(n, targets);
  Outcome x = 0, z = 0;
  int ny = 0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    Outcome b = bit_of(n, targets[t]);
    switch (codes[t]) {
      case 0: break;
      case 1: x |= b; break;
      case 2: x |= b; z |= b; ++ny; break;
      case 3: z |= b; break;
      default: throw std::invalid_argument("Pauli code must be in [0, 3]");
    }
  }
  apply_pauli_masks(state, x, z, ny);
}

double pauli_expectation(const StateVector& state, const PauliOperator& pauli) {
  if (pauli.n_qubits() != state.n_qubits()) {
    throw std::invalid_argument("Pauli size does not match register");
  }
  const Complex iy[4] = {1.0, Complex(0, 1), -1.0, Complex(0, -1)};
  Complex phase = iy[pauli.y_count() % 4];
  auto amps = state.amplitudes();
  Complex acc = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    bool neg = std::popcount(static_cast<Outcome>(i) & pauli.z_mask()) % 2;
    acc += std::conj(amps[i ^ pauli.x_mask()]) * amps[i] * (neg ? -1.0 : 1.0);
  }
  return (phase * acc).real();
}

void apply_depolarizing(StateVector& state, double p, std::span<const int> targets, RngStream& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("depolarizing probability must be in [0, 1]");
  check_targets(state.n_qubits(), targets);
  if (p == 0.0 || rng.uniform() >= p) return;
  int codes[32];
  if (targets.size() > 32) throw std::invalid_argument("too many depolarizing targets");
  for (std::size_t t = 0; t < targets.size(); ++t) codes[t] = static_cast<int>(rng.uniform_index(4));
  apply_pauli_codes(state, targets, std::span<const int>(codes, targets.size()));
}

std::vector<double> outcome_distribution(const StateVector& state) {
  std::vector<double> p(state.dim());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(state[i]);
  return p;
}

Outcome measure_computational(const StateVector& state, RngStream& rng) {
  auto amps = state.amplitudes();
  double total = 0.0;
  for (const Complex& a : amps) total += std::norm(a);
  if (std::abs(total - 1.0) > kNormTol) throw std::domain_error("state is not normalized");
  double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    double w = std::norm(amps[i]);
    if (w > 0.0) last_nonzero = i;
    acc += w;
    if (u < acc) return static_cast<Outcome>(i);
  }
  return static_cast<Outcome>(last_nonzero);
}

}  // namespace fastcal
