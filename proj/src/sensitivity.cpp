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

#include "fastcal/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fastcal {

Eigen::MatrixXd circuit_sensitivities(const Circuit& c, const ControlParameterSet& params, double h_fd) {
  params.validate();
  c.validate(params.size());
  ControlParameterSet at = params;
  at.eta = params.eta_opt;
  const std::size_t m = params.size();
  Eigen::MatrixXd s(static_cast<Eigen::Index>(c.n_outcomes()), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    ControlParameterSet plus = at, minus = at;
    plus.eta[i] += h_fd;
    minus.eta[i] -= h_fd;
    std::vector<double> pp = circuit_distribution(c, plus);
    std::vector<double> pm = circuit_distribution(c, minus);
    for (std::size_t o = 0; o < pp.size(); ++o) {
      double v = (pp[o] - pm[o]) / (2.0 * h_fd);
      if (!std::isfinite(v)) throw std::domain_error("non-finite sensitivity");
      s(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return s;
}

SensitivityVector sensitivity_vector(const Circuit& c, Outcome outcome, const ControlParameterSet& params,
                                     double h_fd) {
  if (outcome >= c.n_outcomes()) throw std::out_of_range("outcome out of range");
  Eigen::MatrixXd s = circuit_sensitivities(c, params, h_fd);
  SensitivityVector v;
  v.circuit = c.name;
  v.outcome = outcome;
  v.values.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    v.values[i] = s(static_cast<Eigen::Index>(outcome), static_cast<Eigen::Index>(i));
  }
  return v;
}

double gx_circuit_sensitivity(double alpha, int r) { return 0.5 * alpha * r; }

double gx_outcome_sensitivity(int z, double alpha, int r) { return -0.5 * z * alpha * r; }

Eigen::VectorXd Jacobian::row(std::size_t circuit, Outcome outcome) const {
  for (std::size_t k = 0; k < circuit_of_row.size(); ++k) {
    if (circuit_of_row[k] == circuit && outcome_of_row[k] == outcome) {
      return matrix.row(static_cast<Eigen::Index>(k)).transpose();
    }
  }
  throw std::out_of_range("no Jacobian row for that circuit and outcome");
}

Jacobian build_jacobian(const std::vector<Circuit>& circuits, const ControlParameterSet& params,
                        JacobianNormalization norm, double h_fd) {
  if (circuits.empty()) throw std::invalid_argument("build_jacobian needs at least one circuit");
  std::size_t rows = 0;
  for (const Circuit& c : circuits) rows += c.n_outcomes();
  Jacobian j;
  j.matrix.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(params.size()));
  j.reference.resize(static_cast<Eigen::Index>(rows));
  ControlParameterSet at = params;
  at.eta = params.eta_opt;
  Eigen::Index r0 = 0;
  for (std::size_t ci = 0; ci < circuits.size(); ++ci) {
    const Circuit& c = circuits[ci];
    Eigen::MatrixXd s = circuit_sensitivities(c, params, h_fd);
    if (norm == JacobianNormalization::unit_frobenius_per_circuit) {
      double f = s.norm();
      if (f > 0.0) s /= f;
    }
    j.matrix.block(r0, 0, s.rows(), s.cols()) = s;
    std::vector<double> ref = circuit_distribution(c, at);
    for (std::size_t o = 0; o < c.n_outcomes(); ++o) {
      j.reference(r0 + static_cast<Eigen::Index>(o)) = ref[o];
      j.row_labels.push_back(c.name + ":" + outcome_to_string(static_cast<Outcome>(o), c.n_qubits));
      j.circuit_of_row.push_back(ci);
      j.outcome_of_row.push_back(static_cast<Outcome>(o));
    }
    r0 += s.rows();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j.matrix);
  const Eigen::VectorXd& sv = svd.singularValues();
  double smax = sv.size() ? sv(0) : 0.0;
  double tol = std::max(1e-9, 1e-9 * smax);
  j.rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > tol) ++j.rank;
  }
  double smin = sv.size() ? sv(sv.size() - 1) : 0.0;
  j.condition_number = (j.informationally_complete() && smin > 0.0)
                           ? smax / smin
                           : std::numeric_limits<double>::infinity();
  return j;
}

Eigen::VectorXd pseudoinverse_estimate(const Jacobian& j, const Eigen::VectorXd& frequencies) {
  if (frequencies.size() != j.matrix.rows()) throw std::invalid_argument("frequency vector length mismatch");
  if (!j.informationally_complete()) throw std::domain_error("Jacobian is rank deficient");
  Eigen::VectorXd rhs = frequencies - j.reference;
  return j.matrix.completeOrthogonalDecomposition().solve(rhs);
}

}  // namespace fastcal
