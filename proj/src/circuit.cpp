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

#include "fastcal/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fastcal {

int Circuit::max_param_index() const {
  int m = -1;
  for (const GateOp& op : ops) {
    for (int p : op.params) m = std::max(m, p);
  }
  return m;
}

namespace {

std::size_t expected_params(GateKind k) {
  switch (k) {
    case GateKind::gx: return 1;
    case GateKind::gy: return 2;
    case GateKind::cz: return 3;
    default: return 0;
  }
}

std::size_t expected_qubits(GateKind k) { return k == GateKind::cz ? 2 : 1; }

void validate_op(const GateOp& op, int n_qubits, std::size_t n_params) {
  if (op.qubits.size() != expected_qubits(op.kind)) throw std::invalid_argument("gate has wrong qubit count");
  if (op.params.size() != expected_params(op.kind)) throw std::invalid_argument("gate has wrong parameter count");
  for (int q : op.qubits) {
    if (q < 0 || q >= n_qubits) throw std::out_of_range("gate qubit out of range");
  }
  for (int p : op.params) {
    if (p < 0 || static_cast<std::size_t>(p) >= n_params) {
      throw std::out_of_range("gate parameter index out of range");
    }
  }
}

GateOp op(GateKind k, std::vector<int> qubits, std::vector<int> params = {}) {
  return GateOp{k, std::move(qubits), std::move(params)};
}

Circuit listed(std::string name, int n_qubits, std::vector<GateOp> written, int repetitions) {
  std::reverse(written.begin(), written.end());
  Circuit c;
  c.name = std::move(name);
  c.n_qubits = n_qubits;
  c.ops = std::move(written);
  c.repetitions = repetitions;
  return c;
}

}  // namespace

void Circuit::validate(std::size_t n_params) const {
  if (repetitions < 1) throw std::invalid_argument("circuit repetitions must be >= 1");
  if (n_qubits < 1 || n_qubits > 5) throw std::invalid_argument("circuit qubit count must be in [1, 5]");
  for (const GateOp& o : ops) validate_op(o, n_qubits, n_params);
  for (const GateOp& o : suffix) {
    if (!o.is_ideal()) throw std::invalid_argument("suffix gates must be ideal");
    validate_op(o, n_qubits, n_params);
  }
}

namespace circuits {

Circuit gx_power(int r, int param) {
  if (r < 1) throw std::invalid_argument("gx_power needs r >= 1");
  Circuit c;
  c.name = "gx_power";
  c.n_qubits = 1;
  c.ops = {op(GateKind::gx, {0}, {param})};
  c.repetitions = r;
  return c;
}

Circuit gxgy_c1(int repetitions) {
  GateOp x = op(GateKind::gx, {0}, {0});
  GateOp y = op(GateKind::gy, {0}, {0, 1});
  return listed("gxgy_c1", 1, {x, y, x, y, x}, repetitions);
}

Circuit gxgy_c2(int repetitions) {
  GateOp x = op(GateKind::gx, {0}, {0});
  GateOp y = op(GateKind::gy, {0}, {0, 1});
  return listed("gxgy_c2", 1, {x, x, y, x, y, x, y}, repetitions);
}

namespace {

Circuit cz_family(std::string name, int gx_qubit, int repetitions) {
  GateOp cz = op(GateKind::cz, {0, 1}, {0, 1, 2});
  GateOp x = op(GateKind::ideal_gx, {gx_qubit});
  Circuit c = listed(std::move(name), 2, {cz, x, cz, x, cz, x}, repetitions);
  // H on both qubits is written last, so it runs first.
  c.ops.insert(c.ops.begin(), {op(GateKind::ideal_h, {0}), op(GateKind::ideal_h, {1})});
  return c;
}

}  // namespace

Circuit cz_c1(int repetitions) { return cz_family("cz_c1", 1, repetitions); }
Circuit cz_c2(int repetitions) { return cz_family("cz_c2", 0, repetitions); }

Circuit by_name(const std::string& name, int repetitions) {
  if (name == "gx_power") return gx_power(repetitions);
  if (name == "gxgy_c1") return gxgy_c1(repetitions);
  if (name == "gxgy_c2") return gxgy_c2(repetitions);
  if (name == "cz_c1") return cz_c1(repetitions);
  if (name == "cz_c2") return cz_c2(repetitions);
  throw std::invalid_argument("unknown built-in circuit '" + name + "'");
}

Circuit from_listing(const std::string& name, const std::vector<std::string>& listing, int n_qubits,
                     int repetitions) {
  std::vector<GateOp> written;
  for (const std::string& g : listing) {
    if (g == "gx") {
      written.push_back(op(GateKind::gx, {0}, {0}));
    } else if (g == "gy") {
      written.push_back(op(GateKind::gy, {0}, {0, 1}));
    } else if (g == "cz") {
      written.push_back(op(GateKind::cz, {0, 1}, {0, 1, 2}));
    } else if (g == "gx1") {
      written.push_back(op(GateKind::ideal_gx, {0}));
    } else if (g == "gx2") {
      written.push_back(op(GateKind::ideal_gx, {1}));
    } else if (g == "h") {
      for (int q = n_qubits - 1; q >= 0; --q) written.push_back(op(GateKind::ideal_h, {q}));
    } else {
      throw std::invalid_argument("unknown gate name '" + g + "' in circuit listing");
    }
  }
  return listed(name, n_qubits, std::move(written), repetitions);
}

}  // namespace circuits

Circuit with_terminal_flip(const Circuit& c) {
  Circuit f = c;
  f.name = c.name + "_flipped";
  for (int q = 0; q < c.n_qubits; ++q) {
    f.suffix.push_back(op(GateKind::ideal_gx, {q}));
    f.suffix.push_back(op(GateKind::ideal_gx, {q}));
  }
  f.outcome_flip = c.outcome_flip ^ static_cast<Outcome>(c.n_outcomes() - 1);
  return f;
}

UnitaryMatrix gate_unitary(const GateOp& o, const ControlParameterSet& params) {
  auto err = [&](std::size_t k) { return params.rotation_error(static_cast<std::size_t>(o.params[k])); };
  switch (o.kind) {
    case GateKind::gx: return build_gx({err(0)});
    case GateKind::gy: return build_gy({err(0), err(1)});
    case GateKind::cz: return build_cz({err(0), err(1), err(2)});
    case GateKind::ideal_gx: return build_gx({0.0});
    case GateKind::ideal_h: return build_hadamard();
  }
  throw std::logic_error("unhandled gate kind");
}

void CircuitRunner::apply_ops(const Circuit& c, const ControlParameterSet& params,
                              const NoiseModel* noise, RngStream* rng) {
  if (state_.n_qubits() != c.n_qubits) state_ = StateVector(c.n_qubits);
  state_.reset();
  cache_.clear();
  for (const GateOp& o : c.ops) cache_.push_back(gate_unitary(o, params));
  double p = noise ? noise->p_gate : 0.0;
  for (int rep = 0; rep < c.repetitions; ++rep) {
    for (std::size_t i = 0; i < c.ops.size(); ++i) {
      const GateOp& o = c.ops[i];
      apply_unitary(state_, cache_[i], o.qubits);
      if (p > 0.0 && !o.is_ideal()) apply_depolarizing(state_, p, o.qubits, *rng);
    }
  }
  for (const GateOp& o : c.suffix) apply_unitary(state_, gate_unitary(o, params), o.qubits);
  if (noise && noise->p_spam > 0.0) {
    std::vector<int> all(static_cast<std::size_t>(c.n_qubits));
    for (int q = 0; q < c.n_qubits; ++q) all[static_cast<std::size_t>(q)] = q;
    apply_depolarizing(state_, noise->p_spam, all, *rng);
  }
}

Outcome CircuitRunner::run(const Circuit& c, const ControlParameterSet& params, const NoiseModel& noise,
                           RngStream& rng) {
  apply_ops(c, params, &noise, &rng);
  return measure_computational(state_, rng);
}

const StateVector& CircuitRunner::evolve(const Circuit& c, const ControlParameterSet& params) {
  apply_ops(c, params, nullptr, nullptr);
  return state_;
}

Outcome run_circuit(const Circuit& c, const ControlParameterSet& params, const NoiseModel& noise,
                    RngStream& rng) {
  CircuitRunner runner(c.n_qubits);
  return runner.run(c, params, noise, rng);
}

std::vector<double> circuit_distribution(const Circuit& c, const ControlParameterSet& params) {
  CircuitRunner runner(c.n_qubits);
  return outcome_distribution(runner.evolve(c, params));
}

double gx_power_probability_one(int r, double delta) {
  return 0.5 * (1.0 - std::cos(r * (std::numbers::pi / 2 + delta)));
}

}  // namespace fastcal
