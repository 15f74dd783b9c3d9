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

// Acceptance checks. Each criterion prints one PASS/FAIL line; the exit code
// is the number of failed criteria.

#include <algorithm>
#include <stdexcept>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "fastcal/config.hpp"
#include "oracles.hpp"

using namespace fastcal;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::vector<ArmResult> run_bundled(const std::string& name, const std::set<std::string>& labels = {}) {
  ExperimentConfig cfg = load_config(find_bundled_config(name));
  std::vector<ArmResult> out;
  for (const ArmConfig& a : cfg.arms) {
    if (labels.empty() || labels.count(a.label)) out.push_back(run_arm(a));
  }
  return out;
}

const ArmResult& arm(const std::vector<ArmResult>& arms, const std::string& label) {
  for (const ArmResult& a : arms) {
    if (a.label == label) return a;
  }
  throw std::out_of_range("no arm " + label);
}

std::size_t late_from(const SummaryStats& s) { return s.row_of(s.t.back() / 2); }

double late_mean_abs(const ArmResult& a) {
  return a.stats.window_mean_abs(0, late_from(a.stats), a.stats.t.size());
}

Verdict mean_convergence() {
  Verdict v;
  for (const ArmResult& a : run_bundled("fig2_mean_convergence")) {
    double g = a.records.front().gain.front();
    for (std::int64_t t : {10, 50, 200}) {
      std::size_t row = a.stats.row_of(t);
      double want = std::pow(1.0 - 2.0 * g, static_cast<double>(t)) * 0.3;
      double got = a.stats.mean_delta[0][row];
      double se = a.stats.stderr_delta(0, row);
      v.require(std::abs(got - want) <= 3.0 * se,
                a.label + fmt(" t=%g: %.5f vs %.5f", static_cast<double>(t), got, want) + fmt(" (%.1f SE)", std::abs(got - want) / se));
    }
  }
  return v;
}

Verdict stationary_variance_no_drift() {
  Verdict v;
  for (const ArmResult& a : run_bundled("fig2_variance_convergence")) {
    double g = a.records.front().gain.front();
    double s = 0.5;
    double want = g / (4.0 * s * s);
    double got = a.stats.window_mean_variance(0, late_from(a.stats), a.stats.t.size());
    v.require(std::abs(got / want - 1.0) <= 0.10, a.label + fmt(": %.5f vs %.5f", got, want));
  }
  return v;
}

Verdict drifted_variance() {
  Verdict v;
  const double l = 0.008, s = 0.5;
  double best_g = 0.0, best_var = 1e300, nearest = 0.0;
  for (const ArmResult& a : run_bundled("fig7_ioc_theory_check")) {
    double g = a.records.front().gain.front();
    double want = g / (4.0 * s * s) + l * l / (4.0 * g);
    double got = a.stats.window_mean_variance(0, late_from(a.stats), a.stats.t.size());
    v.require(std::abs(got / want - 1.0) <= 0.10, a.label + fmt(": %.6f vs %.6f", got, want));
    if (got < best_var) best_var = got, best_g = g;
    if (nearest == 0.0 || std::abs(std::log(g / (l * s))) < std::abs(std::log(nearest / (l * s)))) nearest = g;
  }
  v.require(best_g == nearest, fmt("minimum at g=%g, expected %g", best_g, nearest));
  return v;
}

Verdict printed_jacobians() {
  Verdict v;
  Eigen::MatrixXd gxgy(4, 2);
  gxgy << 0.316, -0.632, -0.316, 0.632, -0.588, 0.392, 0.588, -0.392;
  Eigen::MatrixXd cz(8, 3);
  cz << 0, 1, 1, 0, -1, -1, 0, 1, -1, 0, -1, 1, 1, 0, 1, 1, 0, -1, -1, 0, -1, -1, 0, 1;
  cz /= 4.0;
  Jacobian a = build_jacobian({circuits::gxgy_c1(), circuits::gxgy_c2()},
                              ControlParameterSet({0.0, 0.0}, {0.0, 0.0}, {1.0, -1.0}),
                              JacobianNormalization::unit_frobenius_per_circuit);
  Jacobian b = build_jacobian({circuits::cz_c1(), circuits::cz_c2()},
                              ControlParameterSet({0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {-0.5, -0.5, 0.5}));
  double ea = (a.matrix - gxgy).cwiseAbs().maxCoeff();
  double eb = (b.matrix - cz).cwiseAbs().maxCoeff();
  v.require(ea < 5e-4, fmt("Gx/Gy max error %.2e", ea));
  v.require(eb < 5e-4, fmt("CZ max error %.2e", eb));
  return v;
}

Verdict doc_estimators() {
  Verdict v;
  auto arms = run_bundled("fig13_doc_estimators");
  double mle = late_mean_abs(arm(arms, "mle"));
  double mvue = late_mean_abs(arm(arms, "mvue"));
  v.require(mle <= mvue, fmt("MLE %.4f <= MVUE %.4f", mle, mvue));
  v.require(mle < 0.05 && mvue < 0.05, "both below 0.05");
  return v;
}

Verdict schedulers() {
  Verdict v;
  auto ioc = run_bundled("fig12_autocorrelation", {"scheduled"});
  const ArmResult& sch = ioc.front();
  std::vector<double> final_r;
  for (const TrajectoryRecord& r : sch.records) final_r.push_back(r.reps.back());
  double med_r = quantiles(final_r).median;
  std::size_t from = late_from(sch.stats);
  double g = std::accumulate(sch.stats.mean_gain.begin() + static_cast<std::ptrdiff_t>(from), sch.stats.mean_gain.end(), 0.0) /
             static_cast<double>(sch.stats.mean_gain.size() - from);
  v.require(med_r == 61.0, fmt("median final r %g", med_r));
  v.require(g >= 0.061 / 2.0 && g <= 0.061 * 2.0, fmt("late mean g %.4f vs 0.061", g));
  auto doc = run_bundled("fig14_doc_schedule", {"fixed_r2", "scheduled"});
  double fixed = late_mean_abs(arm(doc, "fixed_r2"));
  double scheduled = late_mean_abs(arm(doc, "scheduled"));
  v.require(scheduled < fixed, fmt("DOC scheduled %.4f < fixed r=2 %.4f", scheduled, fixed));
  return v;
}

Verdict jump_robustness() {
  Verdict v;
  auto arms = run_bundled("fig15_drift_processes", {"ou_jump_ioc", "ou_jump_ioc_rmax13"});
  auto recovered = [](const ArmResult& a) {
    const SummaryStats& s = a.stats;
    return s.mean_abs_delta[0][s.row_of(3000)];
  };
  double r13 = recovered(arm(arms, "ou_jump_ioc_rmax13"));
  double r61 = recovered(arm(arms, "ou_jump_ioc"));
  v.require(r13 < 0.05, fmt("r_max=13 mean |d_eta| at shot 3000 %.4f < 0.05", r13));
  v.require(r61 >= 0.05, fmt("r_max=61 mean |d_eta| at shot 3000 %.4f >= 0.05", r61));
  return v;
}

Verdict qec() {
  Verdict v;
  v.require(SyndromeTable(StabilizerCode513()).is_bijection(), "syndrome table is a bijection");
  auto arms = run_bundled("fig9_qec_survival");
  double cal = 1.0 - arm(arms, "calibrated").stats.mean_infidelity.back();
  double unc = 1.0 - arm(arms, "uncalibrated").stats.mean_infidelity.back();
  v.require(cal > unc, fmt("final survival calibrated %.7f > uncalibrated %.7f (difference %.2e)", cal, unc, cal - unc));
  return v;
}

Verdict duty_cycle_ordering() {
  Verdict v;
  auto arms = run_bundled("fig1_duty_cycle", {"ioc_D0.01", "doc_D0.01", "rabi_D0.01"});
  double ioc = arm(arms, "ioc_D0.01").stats.experiment_infidelity.median;
  double doc = arm(arms, "doc_D0.01").stats.experiment_infidelity.median;
  double rabi = arm(arms, "rabi_D0.01").stats.experiment_infidelity.median;
  v.require(ioc < rabi, fmt("IOC %.3e < Rabi %.3e", ioc, rabi));
  v.require(doc < rabi, fmt("DOC %.3e < Rabi %.3e", doc, rabi));
  return v;
}

oracle::Mat to_oracle(const UnitaryMatrix& u) { return u.matrix(); }

/// Exact output distribution of a circuit with gate and SPAM depolarization.
std::vector<double> density_matrix_distribution(const Circuit& c, const ControlParameterSet& params,
                                                const NoiseModel& noise) {
  oracle::DensityMatrix dm(c.n_qubits);
  for (int rep = 0; rep < c.repetitions; ++rep) {
    for (const GateOp& o : c.ops) {
      dm.apply(to_oracle(gate_unitary(o, params)), o.qubits);
      if (!o.is_ideal() && noise.p_gate > 0.0) dm.depolarize(noise.p_gate, o.qubits);
    }
  }
  for (const GateOp& o : c.suffix) dm.apply(to_oracle(gate_unitary(o, params)), o.qubits);
  std::vector<int> all(static_cast<std::size_t>(c.n_qubits));
  std::iota(all.begin(), all.end(), 0);
  if (noise.p_spam > 0.0) dm.depolarize(noise.p_spam, all);
  return dm.probabilities();
}

std::vector<double> frequencies(const Circuit& c, const ControlParameterSet& params, const NoiseModel& noise,
                                long shots, std::uint64_t id) {
  RngStream rng(20260310, id);
  CircuitRunner runner(c.n_qubits);
  std::vector<double> f(c.n_outcomes(), 0.0);
  for (long i = 0; i < shots; ++i) f[runner.run(c, params, noise, rng)] += 1.0;
  for (double& x : f) x /= static_cast<double>(shots);
  return f;
}

Verdict oracle_suite() {
  Verdict v;
  struct Case {
    Circuit c;
    ControlParameterSet p;
  };
  ControlParameterSet one = ControlParameterSet::with_offsets(std::vector<double>{0.07});
  ControlParameterSet two({0.0, 0.0}, {-0.05, 0.04}, {1.0, -1.0});
  ControlParameterSet three({0.0, 0.0, 0.0}, {0.06, -0.03, 0.05}, {-0.5, -0.5, 0.5});
  std::vector<Case> cases = {
      {circuits::gx_power(1), one},       {circuits::gx_power(13), one},
      {circuits::gxgy_c1(), two},         {circuits::gxgy_c2(3), two},
      {circuits::cz_c1(), three},         {circuits::cz_c2(2), three},
      {with_terminal_flip(circuits::cz_c1()), three}};

  double worst_sigma = 0.0, worst_dm = 0.0, worst_norm = 0.0, worst_exact = 0.0;
  std::uint64_t id = 0;
  for (const Case& k : cases) {
    std::vector<double> born = circuit_distribution(k.c, k.p);
    std::vector<double> exact = density_matrix_distribution(k.c, k.p, NoiseModel{});
    for (std::size_t o = 0; o < born.size(); ++o) worst_exact = std::max(worst_exact, std::abs(born[o] - exact[o]));
    const long shots = 1000000;
    std::vector<double> f = frequencies(k.c, k.p, NoiseModel{}, shots, ++id);
    for (std::size_t o = 0; o < born.size(); ++o) {
      double se = oracle::binomial_se(born[o], static_cast<double>(shots));
      if (born[o] < 1e-12) {
        if (f[o] > 0.0) worst_sigma = 1e9;
        continue;
      }
      worst_sigma = std::max(worst_sigma, std::abs(f[o] - born[o]) / se);
    }

    NoiseModel noisy{0.02, 0.05};
    std::vector<double> rho = density_matrix_distribution(k.c, k.p, noisy);
    std::vector<double> g = frequencies(k.c, k.p, noisy, 4 * shots, ++id);
    for (std::size_t o = 0; o < rho.size(); ++o) worst_dm = std::max(worst_dm, std::abs(g[o] - rho[o]));

    CircuitRunner runner(k.c.n_qubits);
    worst_norm = std::max(worst_norm, std::abs(runner.evolve(k.c, k.p).norm_squared() - 1.0));
    for (const GateOp& o : k.c.ops) {
      if (!gate_unitary(o, k.p).is_unitary(1e-12)) worst_norm = 1.0;
    }
  }
  v.require(worst_exact < 1e-12, fmt("state vector vs density matrix %.1e", worst_exact));
  v.require(worst_sigma <= 4.0, fmt("Born frequencies within %.2f sigma", worst_sigma));
  v.require(worst_dm < 1e-3, fmt("depolarizing unraveling vs density matrix %.1e", worst_dm));
  v.require(worst_norm < 1e-12, fmt("norm and unitarity deviation %.1e", worst_norm));
  return v;
}

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Verdict()> fn;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "mean convergence", 60, mean_convergence},
      {2, "stationary variance without drift", 120, stationary_variance_no_drift},
      {3, "drifted stationary variance and optimal gain", 300, drifted_variance},
      {4, "printed Jacobians", 1, printed_jacobians},
      {5, "DOC estimators", 180, doc_estimators},
      {6, "scheduler checks", 600, schedulers},
      {7, "jump robustness", 300, jump_robustness},
      {8, "QEC survival", 600, qec},
      {9, "duty-cycle ordering", 900, duty_cycle_ordering},
      {10, "oracle equivalence", 300, oracle_suite},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.fn();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.require(secs < c.budget_s, fmt("%.1f s within %.0f s", secs, c.budget_s));
    std::printf("criterion %d (%s): %s: %s\n", c.id, c.name.c_str(), v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
