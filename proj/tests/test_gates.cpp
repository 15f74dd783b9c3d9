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

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>
#include <vector>

#include "fastcal/gates.hpp"
#include "fastcal/rng.hpp"
#include "oracles.hpp"

using namespace fastcal;

namespace {

double max_diff(const ComplexMatrix& a, const oracle::Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// 1 - <Phi| (U0^dag . depol_p . U) (Phi) |Phi> on a system qubit paired with an ancilla.
double oracle_process_infidelity(const oracle::Mat& u, const oracle::Mat& target, double p) {
  oracle::DensityMatrix dm(2);
  Eigen::VectorXcd phi = (oracle::basis(2, 0) + oracle::basis(2, 3)) / std::sqrt(2.0);
  dm.rho = phi * phi.adjoint();
  dm.apply(u, {0});
  dm.depolarize(p, {0});
  dm.apply(target.adjoint(), {0});
  return 1.0 - (phi.adjoint() * dm.rho * phi)(0, 0).real();
}

}  // namespace

TEST_CASE("gate constructors match matrix exponentials") {
  RngStream rng(11, 0);
  for (int trial = 0; trial < 20; ++trial) {
    double a = 0.4 * (rng.uniform() - 0.5), b = 0.4 * (rng.uniform() - 0.5), c = 0.4 * (rng.uniform() - 0.5);
    CHECK(max_diff(build_gx({a}).matrix(), oracle::gx(a)) < 1e-12);
    CHECK(max_diff(build_gy({a, b}).matrix(), oracle::gy(a, b)) < 1e-12);
    CHECK(max_diff(build_cz({a, b, c}).matrix(), oracle::cz(a, b, c)) < 1e-12);
    CHECK(build_gx({a}).is_unitary(1e-12));
    CHECK(build_gy({a, b}).is_unitary(1e-12));
    CHECK(build_cz({a, b, c}).is_unitary(1e-12));
  }
  CHECK(max_diff(build_hadamard().matrix(), oracle::hadamard()) < 1e-15);
}

TEST_CASE("ideal CZ is diagonal with a single sign flip up to global phase") {
  ComplexMatrix m = build_cz({}).matrix();
  Complex phase = m(0, 0);
  CHECK(std::abs(std::abs(phase) - 1.0) < 1e-12);
  CHECK(std::abs(m(1, 1) / phase - 1.0) < 1e-12);
  CHECK(std::abs(m(2, 2) / phase - 1.0) < 1e-12);
  CHECK(std::abs(m(3, 3) / phase + 1.0) < 1e-12);
  CHECK((m - m.diagonal().asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Gx squared is a bit flip") {
  ComplexMatrix g2 = build_gx({}).matrix() * build_gx({}).matrix();
  CHECK(std::abs(g2(0, 0)) < 1e-12);
  CHECK(std::abs(std::abs(g2(1, 0)) - 1.0) < 1e-12);
}

TEST_CASE("single qubit rotation and idle noise factorization") {
  RngStream rng(12, 0);
  std::vector<double> d(kIdleParams);
  for (double& x : d) x = 0.2 * rng.normal();
  UnitaryMatrix full = build_idle_noise(d);
  oracle::Mat ref = oracle::Mat::Identity(1, 1);
  for (int j = 0; j < kIdleQubits; ++j) {
    oracle::Mat h = d[3 * j] * oracle::pauli('X') + d[3 * j + 1] * oracle::pauli('Y') + d[3 * j + 2] * oracle::pauli('Z');
    ref = oracle::kron(ref, oracle::expm(-oracle::kI * h));
  }
  CHECK(max_diff(full.matrix(), ref) < 1e-12);
  CHECK(full.is_unitary(1e-10));
  CHECK(max_diff(single_qubit_rotation(0, 0, 0).matrix(), oracle::Mat::Identity(2, 2)) == 0.0);
  CHECK_THROWS_AS(build_idle_noise(std::vector<double>(3, 0.0)), std::invalid_argument);
}

TEST_CASE("unitary infidelity identities") {
  RngStream rng(13, 0);
  for (int trial = 0; trial < 20; ++trial) {
    double delta = rng.uniform() - 0.5;
    double expected = std::pow(std::sin(delta / 2), 2);
    CHECK(gx_unitary_infidelity(delta) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(entanglement_infidelity_unitary(build_gx({delta}), build_gx({})) == doctest::Approx(expected).epsilon(1e-9));
    oracle::Mat w = oracle::cz(delta, 0.3 * delta, -0.2 * delta), v = oracle::cz(0, 0, 0);
    double oracle_inf = 1.0 - std::norm((w.adjoint() * v).trace()) / 16.0;
    CHECK(entanglement_infidelity_unitary(build_cz({delta, 0.3 * delta, -0.2 * delta}), build_cz({})) ==
          doctest::Approx(oracle_inf).epsilon(1e-9));
  }
  UnitaryMatrix g = build_gy({0.1, 0.2});
  CHECK(entanglement_infidelity_unitary(g, g) < 1e-15);
  CHECK_THROWS_AS(entanglement_infidelity_unitary(build_gx({}), build_cz({})), std::invalid_argument);
}

TEST_CASE("process infidelity agrees with the density matrix oracle") {
  for (double delta : {0.0, 0.01, -0.05, 0.3}) {
    for (double p : {0.0, 0.001, 0.01, 0.2}) {
      double expected = oracle_process_infidelity(oracle::gx(delta), oracle::gx(0.0), p);
      CHECK(gx_process_infidelity(delta, p) == doctest::Approx(expected).epsilon(1e-10));
      TransferMatrix channel = depolarizing_ptm(p, 1) * ptm_from_unitary(build_gx({delta}));
      CHECK(process_infidelity(channel, build_gx({})) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
  CHECK(gx_process_infidelity(0.0, 0.0) == doctest::Approx(0.0));
  CHECK(gx_process_infidelity(0.0, 0.01) == doctest::Approx(0.0075));
  CHECK_THROWS_AS(depolarizing_ptm(1.5, 1), std::invalid_argument);
}

TEST_CASE("transfer matrices are orthogonal for unitaries") {
  TransferMatrix r = ptm_from_unitary(build_cz({0.1, -0.2, 0.05}));
  CHECK(r.rows() == 16);
  CHECK((r.transpose() * r - TransferMatrix::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(r(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("control parameter sets") {
  std::vector<double> offs{0.1, -0.2};
  ControlParameterSet p = ControlParameterSet::with_offsets(offs);
  CHECK(p.size() == 2);
  CHECK(p.delta_eta(0) == doctest::Approx(0.1));
  CHECK(p.delta_eta(1) == doctest::Approx(-0.2));
  ControlParameterSet q({0.5}, {0.2}, {2.0});
  CHECK(q.rotation_error(0) == doctest::Approx(0.6));
  CHECK_THROWS(ControlParameterSet({0.0, 1.0}, {0.0}, {1.0}).validate());
}
