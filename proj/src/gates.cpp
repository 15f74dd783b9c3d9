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

#include "fastcal/gates.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fastcal {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI{0.0, 1.0};

ComplexMatrix m2(Complex a, Complex b, Complex c, Complex d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

/// Single-qubit Paulis I, X, Y, Z.
const std::array<ComplexMatrix, 4>& paulis() {
  static const std::array<ComplexMatrix, 4> p = {
      m2(1, 0, 0, 1), m2(0, 1, 1, 0), m2(0, -kI, kI, 0), m2(1, 0, 0, -1)};
  return p;
}

ComplexMatrix kron_m(const ComplexMatrix& a, const ComplexMatrix& b) {
  return kron(UnitaryMatrix::unchecked(a), UnitaryMatrix::unchecked(b)).matrix();
}

ComplexMatrix pauli_basis_element(std::size_t index, int n_qubits) {
  // Base-4 digit q (most significant first) selects the Pauli on qubit q.
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int q = 0; q < n_qubits; ++q) {
    std::size_t code = (index >> (2 * (n_qubits - 1 - q))) & 3u;
    out = kron_m(out, paulis()[code]);
  }
  return out;
}

int qubits_of_dim(std::size_t d) {
  int n = 0;
  while ((std::size_t{1} << n) < d) ++n;
  if ((std::size_t{1} << n) != d) throw std::invalid_argument("dimension is not a power of two");
  return n;
}

}  // namespace

ControlParameterSet::ControlParameterSet(std::vector<double> e, std::vector<double> eo,
                                         std::vector<double> a)
    : eta(std::move(e)), eta_opt(std::move(eo)), alpha(std::move(a)) {
  validate();
}

ControlParameterSet ControlParameterSet::with_offsets(std::span<const double> delta_eta) {
  std::vector<double> eta(delta_eta.size(), 0.0), opt(delta_eta.size()), alpha(delta_eta.size(), 1.0);
  for (std::size_t i = 0; i < delta_eta.size(); ++i) opt[i] = -delta_eta[i];
  return ControlParameterSet(std::move(eta), std::move(opt), std::move(alpha));
}

std::vector<double> ControlParameterSet::rotation_errors() const {
  std::vector<double> d(size());
  for (std::size_t i = 0; i < size(); ++i) d[i] = rotation_error(i);
  return d;
}

void ControlParameterSet::validate() const {
  if (eta.size() != eta_opt.size() || eta.size() != alpha.size()) {
    throw std::invalid_argument("eta, eta_opt and alpha must have equal lengths");
  }
  for (double a : alpha) {
    if (a == 0.0 || !std::isfinite(a)) throw std::invalid_argument("alpha entries must be finite and nonzero");
  }
}

UnitaryMatrix build_gx(GxParams p) {
  double h = 0.5 * (kPi / 2 + p.delta);
  return UnitaryMatrix::unchecked(m2(std::cos(h), kI * std::sin(h), kI * std::sin(h), std::cos(h)));
}

UnitaryMatrix build_gy(GyParams p) {
  double h = 0.5 * (kPi / 2 + p.theta);
  double c = std::cos(h), s = std::sin(h);
  // n.sigma = [[0, sin(phi) - i cos(phi)], [sin(phi) + i cos(phi), 0]]
  Complex off_up(std::sin(p.phi), -std::cos(p.phi));
  Complex off_dn(std::sin(p.phi), std::cos(p.phi));
  return UnitaryMatrix::unchecked(m2(c, kI * s * off_up, kI * s * off_dn, c));
}

UnitaryMatrix build_cz(CzParams p) {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  for (int b = 0; b < 4; ++b) {
    double za = (b & 2) ? -1.0 : 1.0;
    double zb = (b & 1) ? -1.0 : 1.0;
    double phase = kPi / 4 + (kPi / 4 + p.theta_zz) * za * zb - (kPi / 4 + p.theta_iz) * zb -
                   (kPi / 4 + p.theta_zi) * za;
    m(b, b) = std::polar(1.0, phase);
  }
  return UnitaryMatrix::unchecked(std::move(m));
}

UnitaryMatrix build_hadamard() {
  double r = 1.0 / std::sqrt(2.0);
  return UnitaryMatrix::unchecked(m2(r, r, r, -r));
}

UnitaryMatrix single_qubit_rotation(double nx, double ny, double nz) {
  double norm = std::sqrt(nx * nx + ny * ny + nz * nz);
  if (norm == 0.0) return UnitaryMatrix::identity(2);
  double c = std::cos(norm), s = std::sin(norm) / norm;
  // cos|n| I - i sin|n| n_hat.sigma
  return UnitaryMatrix::unchecked(m2(Complex(c, -s * nz), Complex(-s * ny, -s * nx),
                                     Complex(s * ny, -s * nx), Complex(c, s * nz)));
}

std::array<UnitaryMatrix, kIdleQubits> idle_noise_factors(std::span<const double> deltas) {
  if (deltas.size() != static_cast<std::size_t>(kIdleParams)) {
    throw std::invalid_argument("idle noise needs 15 deltas");
  }
  auto f = [&](int j) { return single_qubit_rotation(deltas[3 * j], deltas[3 * j + 1], deltas[3 * j + 2]); };
  return {f(0), f(1), f(2), f(3), f(4)};
}

UnitaryMatrix build_idle_noise(std::span<const double> deltas) {
  auto f = idle_noise_factors(deltas);
  UnitaryMatrix u = f[0];
  for (int j = 1; j < kIdleQubits; ++j) u = kron(u, f[static_cast<std::size_t>(j)]);
  return u;
}

double entanglement_infidelity_unitary(const UnitaryMatrix& w, const UnitaryMatrix& v) {
  if (w.dim() != v.dim()) throw std::invalid_argument("dimension mismatch");
  double d = static_cast<double>(w.dim());
  Complex tr = (w.matrix().adjoint() * v.matrix()).trace();
  double inf = 1.0 - std::norm(tr) / (d * d);
  return std::max(0.0, inf);
}

TransferMatrix ptm_from_unitary(const UnitaryMatrix& u) {
  int n = qubits_of_dim(u.dim());
  std::size_t d = u.dim();
  std::size_t d2 = d * d;
  std::vector<ComplexMatrix> basis(d2);
  for (std::size_t i = 0; i < d2; ++i) basis[i] = pauli_basis_element(i, n);
  const ComplexMatrix& m = u.matrix();
  TransferMatrix r(static_cast<Eigen::Index>(d2), static_cast<Eigen::Index>(d2));
  for (std::size_t j = 0; j < d2; ++j) {
    ComplexMatrix image = m * basis[j] * m.adjoint();
    for (std::size_t i = 0; i < d2; ++i) {
      r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (basis[i] * image).trace().real() / static_cast<double>(d);
    }
  }
  return r;
}

TransferMatrix depolarizing_ptm(double p, int n_qubits) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("depolarizing probability must be in [0, 1]");
  Eigen::Index d2 = Eigen::Index{1} << (2 * n_qubits);
  TransferMatrix r = TransferMatrix::Identity(d2, d2) * (1.0 - p);
  r(0, 0) = 1.0;
  return r;
}

double process_infidelity(const TransferMatrix& channel, const UnitaryMatrix& target) {
  TransferMatrix lu = ptm_from_unitary(target);
  if (channel.rows() != lu.rows() || channel.cols() != lu.cols()) {
    throw std::invalid_argument("channel and target dimensions differ");
  }
  Eigen::FullPivLU<TransferMatrix> lu_dec(lu);
  if (!lu_dec.isInvertible()) throw std::domain_error("target transfer matrix is singular");
  double d2 = static_cast<double>(lu.rows());
  return 1.0 - (channel * lu_dec.inverse()).trace() / d2;
}

double gx_process_infidelity(double delta, double p) {
  return 1.0 - (1.0 + (1.0 - p) * (1.0 + 2.0 * std::cos(delta))) / 4.0;
}

double gx_unitary_infidelity(double delta) {
  double s = std::sin(0.5 * delta);
  return s * s;
}

}  // namespace fastcal
