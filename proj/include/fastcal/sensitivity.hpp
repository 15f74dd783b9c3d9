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

#include <Eigen/Dense>

#include "fastcal/circuit.hpp"

namespace fastcal {

constexpr double kDefaultFdStep = 1e-5;
constexpr double kConditionWarning = 10.0;

struct SensitivityVector {
  std::vector<double> values;  // d Pr(outcome) / d eta_i
  std::string circuit;
  Outcome outcome = 0;
};

/// Central finite differences of the noiseless outcome distribution with
/// respect to every control, evaluated at eta = eta_opt. Row o of the result
/// is the sensitivity vector of outcome o.
Eigen::MatrixXd circuit_sensitivities(const Circuit& c, const ControlParameterSet& params,
                                      double h_fd = kDefaultFdStep);
SensitivityVector sensitivity_vector(const Circuit& c, Outcome outcome, const ControlParameterSet& params,
                                     double h_fd = kDefaultFdStep);

/// Analytic sensitivity magnitude s = alpha r / 2 of (Gx)^r with r = 1 mod 4.
double gx_circuit_sensitivity(double alpha, int r);
/// Signed outcome sensitivity s_z = -z alpha r / 2.
double gx_outcome_sensitivity(int z, double alpha, int r);

enum class JacobianNormalization {
  none,
  /// Each circuit's block of rows is scaled to unit Frobenius norm.
  unit_frobenius_per_circuit,
};

struct Jacobian {
  Eigen::MatrixXd matrix;                // rows: (circuit, outcome); cols: parameters
  std::vector<std::string> row_labels;   // "circuit:bits"
  std::vector<std::size_t> circuit_of_row;
  std::vector<Outcome> outcome_of_row;
  Eigen::VectorXd reference;             // ideal probabilities at eta_opt per row
  int rank = 0;
  double condition_number = 0.0;

  std::size_t n_params() const { return static_cast<std::size_t>(matrix.cols()); }
  bool informationally_complete() const { return rank == static_cast<int>(n_params()); }
  bool well_conditioned() const { return condition_number <= kConditionWarning; }
  /// Row for (circuit index, outcome).
  Eigen::VectorXd row(std::size_t circuit, Outcome outcome) const;
};

Jacobian build_jacobian(const std::vector<Circuit>& circuits, const ControlParameterSet& params,
                        JacobianNormalization norm = JacobianNormalization::none,
                        double h_fd = kDefaultFdStep);

/// Least-squares offset estimate J^+ (f - p_ref) from stacked per-row
/// outcome frequencies. Throws on a rank-deficient Jacobian.
Eigen::VectorXd pseudoinverse_estimate(const Jacobian& j, const Eigen::VectorXd& frequencies);

}  // namespace fastcal
