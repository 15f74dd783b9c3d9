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

#include "fastcal/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <tuple>

namespace fastcal {

using nlohmann::json;

namespace {

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    std::string p = key.empty() ? path_ : join_path(path_, key);
    throw ConfigError((p.empty() ? std::string("<root>") : p) + ": " + what);
  }

  std::string path(const std::string& key) const { return join_path(path_, key); }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& raw(const std::string& key) const { return j_.at(key); }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!ok.count(it.key())) fail(it.key(), "unknown field");
    }
  }

  Node child(const std::string& key) const {
    if (!has(key)) fail(key, "missing object");
    return Node(j_.at(key), path(key));
  }

  double number(const std::string& key, std::optional<double> def = std::nullopt) const {
    if (!has(key)) {
      if (def) return *def;
      fail(key, "missing number");
    }
    const json& v = j_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) fail(key, "expected a finite number");
    return x;
  }

  std::int64_t integer(const std::string& key, std::optional<std::int64_t> def = std::nullopt) const {
    if (!has(key)) {
      if (def) return *def;
      fail(key, "missing integer");
    }
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<std::int64_t>();
  }

  bool flag(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key, std::optional<std::string> def = std::nullopt) const {
    if (!has(key)) {
      if (def) return *def;
      fail(key, "missing string");
    }
    const json& v = j_.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  /// A number or a list of numbers.
  std::vector<double> numbers(const std::string& key, std::vector<double> def) const {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array() || v.empty()) fail(key, "expected a number or a non-empty list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(key + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& key) const {
    const json& v = j_.at(key);
    if (!v.is_array() || v.empty()) fail(key, "expected a non-empty list of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) fail(key + "[" + std::to_string(i) + "]", "expected a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

int to_int(const Node& n, const std::string& key, std::int64_t v) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) n.fail(key, "out of range");
  return static_cast<int>(v);
}

template <class F>
auto rethrow_at(const Node& n, const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    n.fail(key, e.what());
  }
}

DriftSpec parse_drift(const Node& n) {
  std::string kind = n.text("kind", "none");
  DriftSpec d;
  d.kind = rethrow_at(n, "kind", [&] { return drift_kind_from_string(kind); });
  switch (d.kind) {
    case DriftKind::none:
      n.allow({"kind"});
      break;
    case DriftKind::random_walk:
      n.allow({"kind", "step"});
      d.step = n.number("step");
      break;
    case DriftKind::ornstein_uhlenbeck:
      n.allow({"kind", "reversion", "volatility", "mean"});
      d.reversion = n.number("reversion");
      d.volatility = n.number("volatility");
      d.mean = n.number("mean", 0.0);
      break;
    case DriftKind::jump:
      n.allow({"kind", "shot", "magnitude"});
      d.jump_shot = n.integer("shot");
      d.jump_magnitude = n.number("magnitude");
      break;
    case DriftKind::one_over_f:
      n.allow({"kind", "scale", "components"});
      d.scale = n.number("scale", 0.001);
      d.components = to_int(n, "components", n.integer("components", 7));
      break;
    case DriftKind::composite: {
      n.allow({"kind", "parts"});
      if (!n.has("parts") || !n.raw("parts").is_array() || n.raw("parts").empty()) {
        n.fail("parts", "expected a non-empty list of drift specs");
      }
      const json& parts = n.raw("parts");
      for (std::size_t i = 0; i < parts.size(); ++i) {
        d.parts.push_back(parse_drift(Node(parts[i], n.path("parts[" + std::to_string(i) + "]"))));
      }
      break;
    }
  }
  rethrow_at(n, "", [&] {
    d.validate();
    return 0;
  });
  return d;
}

SchedulerSpec parse_scheduler(const Node& n) {
  n.allow({"kind", "g_max", "drift_step", "prior_mean", "prior_variance", "bins", "bin_size", "kappa",
           "delta_max", "sliding", "schedule_gain", "schedule_repetitions", "r_cap", "window", "a_upper",
           "a_lower", "b", "r_max", "g_multiplier", "r_sequence"});
  SchedulerSpec s;
  std::string kind = n.text("kind", "static");
  s.kind = rethrow_at(n, "kind", [&] { return scheduler_kind_from_string(kind); });
  s.g_max = n.number("g_max", s.g_max);
  s.drift_step = n.number("drift_step", s.drift_step);
  s.prior_mean = n.number("prior_mean", s.prior_mean);
  s.prior_variance = n.number("prior_variance", s.prior_variance);
  s.bins = to_int(n, "bins", n.integer("bins", s.bins));
  s.bin_size = to_int(n, "bin_size", n.integer("bin_size", s.bin_size));
  s.kappa = n.number("kappa", s.kappa);
  s.delta_max = n.number("delta_max", s.delta_max);
  s.sliding = n.flag("sliding", s.sliding);
  s.schedule_gain = n.flag("schedule_gain", s.schedule_gain);
  s.schedule_repetitions = n.flag("schedule_repetitions", s.schedule_repetitions);
  s.r_cap = to_int(n, "r_cap", n.integer("r_cap", s.r_cap));
  s.window = to_int(n, "window", n.integer("window", s.window));
  s.a_upper = n.number("a_upper", s.a_upper);
  s.a_lower = n.number("a_lower", s.a_lower);
  s.b = n.number("b", s.b);
  s.r_max = to_int(n, "r_max", n.integer("r_max", s.r_max));
  s.g_multiplier = n.number("g_multiplier", s.g_multiplier);
  if (n.has("r_sequence")) {
    std::vector<double> seq = n.numbers("r_sequence", {});
    s.r_sequence.clear();
    for (double v : seq) {
      if (v != std::floor(v)) n.fail("r_sequence", "expected integers");
      s.r_sequence.push_back(static_cast<int>(v));
    }
  }
  return s;
}

std::vector<Circuit> parse_circuits(const Node& n, const std::string& key, int r) {
  const json& v = n.raw(key);
  if (!v.is_array() || v.empty()) n.fail(key, "expected a non-empty list of circuits");
  std::vector<Circuit> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::string p = key + "[" + std::to_string(i) + "]";
    if (v[i].is_string()) {
      std::string name = v[i].get<std::string>();
      out.push_back(rethrow_at(n, p, [&] { return circuits::by_name(name, r); }));
    } else {
      Node c(v[i], n.path(p));
      c.allow({"name", "qubits", "gates"});
      std::string name = c.text("name", "custom" + std::to_string(i));
      int q = to_int(c, "qubits", c.integer("qubits"));
      if (!c.has("gates")) c.fail("gates", "missing list");
      std::vector<std::string> gates = c.strings("gates");
      out.push_back(rethrow_at(c, "gates", [&] { return circuits::from_listing(name, gates, q, r); }));
    }
  }
  return out;
}

struct KindInfo {
  std::string method;
  CircuitFamily family;
};

const std::map<std::string, KindInfo>& kind_table() {
  static const std::map<std::string, KindInfo> t = {
      {"ioc_single", {"ioc", CircuitFamily::gx}},      {"ioc_batched", {"ioc", CircuitFamily::gx}},
      {"analytics_check", {"ioc", CircuitFamily::gx}}, {"ioc_multi_gxgy", {"ioc_multi", CircuitFamily::gxgy}},
      {"ioc_multi_cz", {"ioc_multi", CircuitFamily::cz}}, {"doc_single", {"doc", CircuitFamily::gx}},
      {"qec_513", {"qec", CircuitFamily::gx}},         {"rabi", {"rabi", CircuitFamily::gx}},
      {"compare_duty_cycle", {"", CircuitFamily::gx}},
  };
  return t;
}

void parse_ioc_protocol(const Node& p, ArmConfig& a, const std::string& experiment) {
  a.ioc.r = to_int(p, "r", p.integer("r", 1));
  a.ioc.batch = to_int(p, "batch", p.integer("batch", 1));
  a.ioc.alternate_spam = p.flag("alternate_spam", false);
  if (p.has("scheduler")) a.ioc.scheduler = parse_scheduler(p.child("scheduler"));
  if (experiment != "ioc_batched" && a.ioc.batch != 1) p.fail("batch", "batching requires experiment ioc_batched");
  a.duty_cycle = p.number("duty_cycle", 1.0);
  a.run.idle_per_shot = rethrow_at(p, "duty_cycle", [&] { return single_shot_idle(a.duty_cycle); });
  if (p.has("g") && p.raw("g").is_string()) {
    if (p.text("g") != "duty_cycle") p.fail("g", "expected a number or \"duty_cycle\"");
    if (a.run.drift.kind != DriftKind::random_walk) p.fail("g", "\"duty_cycle\" gain needs a random-walk drift");
    a.ioc.g = duty_cycle_ioc_gain(a.run.idle_per_shot, a.run.drift.step, a.ioc.r);
  } else {
    a.ioc.g = p.number("g", 0.1);
  }
  rethrow_at(p, "", [&] {
    a.ioc.validate();
    return 0;
  });
}

void parse_doc_protocol(const Node& p, ArmConfig& a) {
  a.doc.n = to_int(p, "n", p.integer("n", 2));
  a.doc.r = to_int(p, "r", p.integer("r", 6));
  std::string est = p.text("estimator", "mle");
  a.doc.estimator = rethrow_at(p, "estimator", [&] { return estimator_from_string(est); });
  if (p.has("scheduler")) {
    Node s = p.child("scheduler");
    s.allow({"enabled", "n_min", "n_max", "delta_r", "r_min", "r_cap"});
    DocSchedulerSpec& d = a.doc.scheduler;
    d.enabled = s.flag("enabled", true);
    d.n_min = to_int(s, "n_min", s.integer("n_min", d.n_min));
    d.n_max = to_int(s, "n_max", s.integer("n_max", d.n_max));
    d.delta_r = to_int(s, "delta_r", s.integer("delta_r", d.delta_r));
    d.r_min = to_int(s, "r_min", s.integer("r_min", d.r_min));
    d.r_cap = to_int(s, "r_cap", s.integer("r_cap", d.r_cap));
  }
  a.duty_cycle = p.number("duty_cycle", 1.0);
  a.run.idle_per_shot = rethrow_at(p, "duty_cycle", [&] { return single_shot_idle(a.duty_cycle); });
  rethrow_at(p, "", [&] {
    a.doc.validate();
    return 0;
  });
}

void parse_rabi_protocol(const Node& p, ArmConfig& a) {
  RabiConfig& c = a.rabi;
  c.r_points = to_int(p, "r_points", p.integer("r_points", c.r_points));
  c.n_batch = to_int(p, "n_batch", p.integer("n_batch", c.n_batch));
  c.duty_cycle = p.number("duty_cycle", c.duty_cycle);
  c.starts = to_int(p, "starts", p.integer("starts", c.starts));
  c.degenerate_range = p.number("degenerate_range", c.degenerate_range);
  auto bounds = [&](const char* key, double& lo, double& hi) {
    if (!p.has(key)) return;
    std::vector<double> b = p.numbers(key, {});
    if (b.size() != 2) p.fail(key, "expected [lo, hi]");
    lo = b[0];
    hi = b[1];
  };
  bounds("a_bounds", c.a_lo, c.a_hi);
  bounds("b_bounds", c.b_lo, c.b_hi);
  bounds("theta_bounds", c.theta_lo, c.theta_hi);
  bounds("c_bounds", c.c_lo, c.c_hi);
  a.duty_cycle = c.duty_cycle;
  rethrow_at(p, "", [&] {
    c.validate();
    return 0;
  });
}

/// Common fields, then the experiment-specific protocol block.
ArmConfig parse_arm(const json& merged, const std::string& label, const std::string& experiment,
                    const Overrides& o) {
  Node root(merged, "");
  ArmConfig a;
  a.label = label;
  a.resolved = merged;
  const KindInfo& info = kind_table().at(experiment);
  a.method = info.method;
  a.family = info.family;

  RunSpec& run = a.run;
  if (!root.has("seed")) root.fail("seed", "missing (the master seed is mandatory)");
  const json& seed = root.raw("seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
    root.fail("seed", "expected a non-negative integer");
  }
  run.seed = o.seed ? *o.seed : seed.get<std::uint64_t>();
  run.trajectories = o.trajectories ? *o.trajectories : to_int(root, "trajectories", root.integer("trajectories"));
  run.shots = o.shots ? *o.shots : root.integer("shots");
  run.stride = root.integer("record_stride", 1);
  run.workers = o.workers ? *o.workers : 1;
  if (run.trajectories < 1) root.fail("trajectories", "must be >= 1");
  if (run.shots < 1) root.fail("shots", "must be >= 1");
  if (run.stride < 1) root.fail("record_stride", "must be >= 1");
  if (run.workers < 1) root.fail("workers", "must be >= 1");

  if (root.has("noise")) {
    Node n = root.child("noise");
    n.allow({"p", "p_spam"});
    run.noise.p_gate = n.number("p", 0.0);
    run.noise.p_spam = n.number("p_spam", 0.0);
    if (run.noise.p_gate < 0 || run.noise.p_gate > 1) n.fail("p", "must be in [0, 1]");
    if (run.noise.p_spam < 0 || run.noise.p_spam > 1) n.fail("p_spam", "must be in [0, 1]");
  }
  if (root.has("drift")) run.drift = parse_drift(root.child("drift"));

  std::size_t n_params = info.family == CircuitFamily::gxgy ? 2 : info.family == CircuitFamily::cz ? 3 : 1;
  if (a.method == "qec") n_params = kIdleParams;
  if (info.family == CircuitFamily::gxgy) run.alpha = {1.0, -1.0};
  if (info.family == CircuitFamily::cz) run.alpha = {-0.5, -0.5, 0.5};
  run.offset.fixed.assign(n_params, 0.0);
  if (root.has("params")) {
    Node p = root.child("params");
    p.allow({"alpha", "initial_offset"});
    run.alpha = p.numbers("alpha", run.alpha);
    if (run.alpha.size() != 1 && run.alpha.size() != n_params) {
      p.fail("alpha", "expected 1 or " + std::to_string(n_params) + " values");
    }
    for (double al : run.alpha) {
      if (al == 0.0) p.fail("alpha", "couplings must be nonzero");
    }
    if (p.has("initial_offset")) {
      const json& v = p.raw("initial_offset");
      if (v.is_object()) {
        Node u(v, p.path("initial_offset"));
        u.allow({"uniform"});
        std::vector<double> b = u.numbers("uniform", {});
        if (b.size() != 2 || !(b[0] <= b[1])) u.fail("uniform", "expected [lo, hi] with lo <= hi");
        run.offset.uniform = true;
        run.offset.lo = b[0];
        run.offset.hi = b[1];
      } else {
        run.offset.fixed = p.numbers("initial_offset", {});
        if (run.offset.fixed.size() != 1 && run.offset.fixed.size() != n_params) {
          p.fail("initial_offset", "expected 1 or " + std::to_string(n_params) + " values");
        }
      }
    }
  }
  std::string inf = root.text("infidelity", "unitary");
  if (inf == "unitary") {
    run.infidelity = InfidelityKind::unitary;
  } else if (inf == "process") {
    run.infidelity = InfidelityKind::process;
  } else {
    root.fail("infidelity", "expected \"unitary\" or \"process\"");
  }

  json empty = json::object();
  Node p = root.has("protocol") ? root.child("protocol") : Node(empty, "protocol");
  if (a.method == "ioc") {
    p.allow({"g", "r", "batch", "alternate_spam", "scheduler", "duty_cycle"});
    parse_ioc_protocol(p, a, experiment);
  } else if (a.method == "ioc_multi") {
    p.allow({"g", "r", "alternate_spam", "circuits"});
    a.multi.g = p.number("g", a.multi.g);
    a.multi.r = to_int(p, "r", p.integer("r", 1));
    a.multi.alternate_spam = p.flag("alternate_spam", false);
    rethrow_at(p, "", [&] {
      a.multi.validate();
      return 0;
    });
    if (p.has("circuits")) {
      a.circuits = parse_circuits(p, "circuits", a.multi.r);
    } else if (a.family == CircuitFamily::gxgy) {
      a.circuits = {circuits::gxgy_c1(a.multi.r), circuits::gxgy_c2(a.multi.r)};
    } else {
      a.circuits = {circuits::cz_c1(a.multi.r), circuits::cz_c2(a.multi.r)};
    }
    for (std::size_t i = 0; i < a.circuits.size(); ++i) {
      rethrow_at(p, "circuits[" + std::to_string(i) + "]", [&] {
        a.circuits[i].validate(n_params);
        return 0;
      });
    }
  } else if (a.method == "doc") {
    p.allow({"n", "r", "estimator", "scheduler", "duty_cycle"});
    parse_doc_protocol(p, a);
  } else if (a.method == "qec") {
    p.allow({"n", "calibrate", "recover"});
    a.qec.n = to_int(p, "n", p.integer("n", 2));
    a.qec.calibrate = p.flag("calibrate", true);
    a.qec.recover = p.flag("recover", true);
    a.qec.drift = run.drift;
    if (run.offset.uniform) root.fail("params.initial_offset", "qec_513 needs fixed offsets");
    a.qec.initial_offsets = run.offset.fixed.size() == 1 ? std::vector<double>(kIdleParams, run.offset.fixed[0])
                                                         : run.offset.fixed;
    rethrow_at(p, "", [&] {
      a.qec.validate();
      return 0;
    });
  } else if (a.method == "rabi") {
    p.allow({"r_points", "n_batch", "duty_cycle", "starts", "degenerate_range", "a_bounds", "b_bounds",
             "theta_bounds", "c_bounds"});
    parse_rabi_protocol(p, a);
  }
  if (!root.flag("calibrate", true)) {
    if (a.method == "qec") root.fail("calibrate", "use protocol.calibrate for qec_513");
    a.method = "none";
  }
  rethrow_at(root, "", [&] {
    run.validate();
    return 0;
  });
  return a;
}

/// compare_duty_cycle expands into one arm per (method, D).
std::vector<ArmConfig> expand_duty_cycle(const json& merged, const std::string& label_prefix, const Overrides& o) {
  Node root(merged, "");
  Node p = root.child("protocol");
  p.allow({"duty_cycles", "methods", "ioc", "doc", "rabi"});
  std::vector<double> ds = p.numbers("duty_cycles", {});
  if (ds.empty()) p.fail("duty_cycles", "missing list");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!(ds[i] > 0.0 && ds[i] <= 1.0)) p.fail("duty_cycles[" + std::to_string(i) + "]", "must be in (0, 1]");
  }
  std::vector<std::string> methods = {"ioc", "doc", "rabi"};
  if (p.has("methods")) methods = p.strings("methods");
  static const std::map<std::string, std::string> kinds = {
      {"ioc", "ioc_single"}, {"doc", "doc_single"}, {"rabi", "rabi"}};
  std::vector<ArmConfig> arms;
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    const std::string& m = methods[mi];
    auto k = kinds.find(m);
    if (k == kinds.end()) p.fail("methods[" + std::to_string(mi) + "]", "expected ioc, doc or rabi");
    json sub = p.has(m) ? p.raw(m) : json::object();
    if (!sub.is_object()) p.fail(m, "expected an object");
    for (double d : ds) {
      json arm = merged;
      arm["protocol"] = sub;
      arm["protocol"]["duty_cycle"] = d;
      if (m == "ioc" && !sub.contains("g")) arm["protocol"]["g"] = "duty_cycle";
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s_D%g", m.c_str(), d);
      std::string label = label_prefix.empty() ? buf : label_prefix + "_" + buf;
      try {
        arms.push_back(parse_arm(arm, label, k->second, o));
      } catch (const ConfigError& e) {
        std::string msg = e.what();
        if (msg.rfind("protocol.", 0) == 0) msg = "protocol." + m + "." + msg.substr(9);
        throw ConfigError(msg);
      }
      arms.back().resolved = arm;
    }
  }
  return arms;
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {"ioc_single", "ioc_multi_gxgy", "ioc_multi_cz",
                                                 "ioc_batched", "doc_single", "qec_513",
                                                 "rabi", "compare_duty_cycle", "analytics_check"};
  return kinds;
}

ExperimentConfig parse_config(const json& j, const Overrides& o) {
  Node root(j, "");
  root.allow({"schema_version", "name", "description", "experiment", "seed", "trajectories", "shots",
              "record_stride", "params", "noise", "drift", "infidelity", "calibrate", "protocol", "arms",
              "full_scale", "outputs"});
  std::int64_t version = root.integer("schema_version");
  if (version != kSchemaVersion) root.fail("schema_version", "unsupported version " + std::to_string(version));
  ExperimentConfig cfg;
  cfg.source = j;
  cfg.name = root.text("name");
  if (cfg.name.empty()) root.fail("name", "must not be empty");
  cfg.description = root.text("description", "");
  cfg.experiment = root.text("experiment");
  if (!kind_table().count(cfg.experiment)) root.fail("experiment", "unknown experiment kind \"" + cfg.experiment + "\"");
  if (root.has("outputs")) {
    Node out = root.child("outputs");
    out.allow({"trajectory_rows"});
    cfg.trajectory_rows = out.flag("trajectory_rows", true);
  }

  json base = j;
  base.erase("arms");
  base.erase("full_scale");
  base.erase("outputs");
  if (o.full_scale && j.contains("full_scale")) {
    if (!j["full_scale"].is_object()) root.fail("full_scale", "expected an object");
    base.merge_patch(j["full_scale"]);
  }
  if (o.seed) base["seed"] = *o.seed;
  if (o.trajectories) base["trajectories"] = *o.trajectories;
  if (o.shots) base["shots"] = *o.shots;

  std::vector<std::pair<std::string, json>> patches;
  if (j.contains("arms")) {
    const json& arms = j["arms"];
    if (!arms.is_array() || arms.empty()) root.fail("arms", "expected a non-empty list");
    for (std::size_t i = 0; i < arms.size(); ++i) {
      Node a(arms[i], "arms[" + std::to_string(i) + "]");
      std::string label = a.text("label");
      if (label.empty()) a.fail("label", "must not be empty");
      json patch = arms[i];
      patch.erase("label");
      for (const char* banned : {"schema_version", "name", "experiment", "arms", "full_scale", "outputs"}) {
        if (patch.contains(banned)) a.fail(banned, "cannot be overridden per arm");
      }
      patches.emplace_back(label, patch);
    }
  } else {
    patches.emplace_back("", json::object());
  }

  std::set<std::string> seen;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    json merged = base;
    merged.merge_patch(patches[i].second);
    std::vector<ArmConfig> arms;
    try {
      if (cfg.experiment == "compare_duty_cycle") {
        arms = expand_duty_cycle(merged, patches[i].first, o);
      } else {
        arms.push_back(parse_arm(merged, patches[i].first.empty() ? cfg.experiment : patches[i].first,
                                 cfg.experiment, o));
      }
    } catch (const ConfigError& e) {
      if (!j.contains("arms")) throw;
      throw ConfigError("arms[" + std::to_string(i) + "] (" + patches[i].first + "): " + e.what());
    }
    for (ArmConfig& a : arms) {
      if (!seen.insert(sanitize_label(a.label)).second) {
        throw ConfigError("arms[" + std::to_string(i) + "].label: duplicate label \"" + a.label + "\"");
      }
      cfg.arms.push_back(std::move(a));
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& o) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": parse error: " + e.what());
  }
  return parse_config(j, o);
}

std::filesystem::path bundled_config_dir() {
  if (const char* env = std::getenv("FASTCAL_CONFIG_DIR")) return env;
  return FASTCAL_CONFIG_DIR;
}

std::vector<BundledConfig> list_bundled_configs(const std::filesystem::path& dir) {
  std::vector<BundledConfig> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    json j = json::parse(in, nullptr, false, true);
    if (j.is_discarded() || !j.is_object()) continue;
    BundledConfig b;
    b.name = j.value("name", entry.path().stem().string());
    b.description = j.value("description", "");
    b.experiment = j.value("experiment", "");
    b.path = entry.path();
    out.push_back(std::move(b));
  }
  // Natural order, so fig2 sorts before fig10.
  auto key = [](const std::string& n) {
    std::size_t i = 0;
    while (i < n.size() && !std::isdigit(static_cast<unsigned char>(n[i]))) ++i;
    std::size_t j = i;
    while (j < n.size() && std::isdigit(static_cast<unsigned char>(n[j]))) ++j;
    long num = j > i ? std::stol(n.substr(i, j - i)) : -1;
    return std::make_tuple(n.substr(0, i), num, n.substr(j));
  };
  std::sort(out.begin(), out.end(),
            [&](const BundledConfig& a, const BundledConfig& b) { return key(a.name) < key(b.name); });
  return out;
}

std::filesystem::path find_bundled_config(const std::string& key, const std::filesystem::path& dir) {
  std::vector<BundledConfig> all = list_bundled_configs(dir);
  for (const BundledConfig& b : all) {
    if (b.name == key) return b.path;
  }
  for (const BundledConfig& b : all) {
    if (b.experiment == key) return b.path;
  }
  throw ConfigError("no bundled config named or defaulting for \"" + key + "\"");
}

std::string sanitize_label(const std::string& label) {
  std::string s = label;
  for (char& c : s) {
    bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_';
    if (!ok) c = '_';
  }
  return s;
}

namespace {

/// Static-gain single-parameter IOC without noise: closed-form moments per row.
bool predictions_apply(const ArmConfig& a) {
  if (a.method != "ioc") return false;
  const RunSpec& r = a.run;
  bool drift_ok = r.drift.kind == DriftKind::none || r.drift.kind == DriftKind::random_walk;
  return a.ioc.scheduler.kind == SchedulerKind::static_gain && a.ioc.batch == 1 && r.idle_per_shot == 0 &&
         drift_ok && r.noise.p_gate == 0.0 && r.noise.p_spam == 0.0;
}

json quantiles_json(const Quantiles& q) { return {{"q25", q.q25}, {"median", q.median}, {"q75", q.q75}}; }

}  // namespace

ArmResult run_arm(const ArmConfig& a) {
  ArmResult res;
  res.label = a.label;
  res.method = a.method;
  if (a.method == "ioc") {
    res.records = run_ioc_single(a.run, a.ioc);
  } else if (a.method == "ioc_multi") {
    std::function<double(const ControlParameterSet&)> inf =
        a.family == CircuitFamily::cz ? cz_infidelity : gxgy_infidelity;
    res.records = run_ioc_multi(a.run, a.multi, a.circuits, inf);
  } else if (a.method == "doc") {
    res.records = run_doc_single(a.run, a.doc);
  } else if (a.method == "qec") {
    res.records = run_qec(a.run, a.qec);
  } else if (a.method == "rabi") {
    res.records = run_rabi(a.run, a.rabi);
  } else if (a.method == "none") {
    std::function<double(const ControlParameterSet&)> inf;
    std::size_t n = 1;
    if (a.family == CircuitFamily::cz) {
      inf = cz_infidelity;
      n = 3;
    } else if (a.family == CircuitFamily::gxgy) {
      inf = gxgy_infidelity;
      n = 2;
    } else {
      inf = [&](const ControlParameterSet& p) { return gx_infidelity(p, a.run.infidelity, a.run.noise.p_gate); };
    }
    res.records = run_uncalibrated(a.run, n, inf);
  } else {
    throw std::logic_error("unknown method " + a.method);
  }
  res.stats = summarize(res.records);
  const SummaryStats& s = res.stats;
  std::size_t last = s.t.size() - 1;

  json& j = res.summary;
  j["label"] = a.label;
  j["method"] = a.method;
  j["trajectories"] = a.run.trajectories;
  j["shots"] = a.run.shots;
  j["record_stride"] = a.run.stride;
  j["seed"] = a.run.seed;
  j["n_params"] = s.mean_delta.size();
  if (a.method == "ioc" || a.method == "doc" || a.method == "rabi") j["duty_cycle"] = a.duty_cycle;
  if (a.method == "ioc") j["g"] = a.ioc.g;
  j["experiment_mean_infidelity"] = quantiles_json(s.experiment_infidelity);
  double total = 0.0;
  for (double v : s.experiment_mean_infidelity) total += v;
  j["experiment_mean_infidelity"]["mean"] = total / static_cast<double>(s.experiment_mean_infidelity.size());
  json fin;
  fin["t"] = s.t[last];
  for (std::size_t p = 0; p < s.mean_delta.size(); ++p) {
    fin["mean_delta_eta"].push_back(s.mean_delta[p][last]);
    fin["var_delta_eta"].push_back(s.var_delta[p][last]);
    fin["mean_abs_delta_eta"].push_back(s.mean_abs_delta[p][last]);
  }
  fin["mean_infidelity"] = s.mean_infidelity[last];
  fin["mean_gain"] = s.mean_gain[last];
  fin["mean_reps"] = s.mean_reps[last];
  j["final"] = fin;
  double updates = 0.0, aborts = 0.0;
  for (const TrajectoryRecord& r : res.records) {
    updates += static_cast<double>(r.updates);
    aborts += static_cast<double>(r.aborts);
  }
  j["mean_updates"] = updates / static_cast<double>(res.records.size());
  j["mean_aborts"] = aborts / static_cast<double>(res.records.size());

  if (a.method == "qec") {
    j["final_mean_survival"] = 1.0 - s.mean_infidelity[last];
    std::map<std::int64_t, std::int64_t> counts;
    for (const TrajectoryRecord& r : res.records) {
      for (std::int64_t o : r.outcome) {
        if (o >= 0) ++counts[o];
      }
    }
    json sc = json::object();
    for (auto [k, v] : counts) sc[std::to_string(k)] = v;
    j["syndrome_counts"] = sc;
    j["syndrome_counts_cover_stride"] = a.run.stride;
  }

  if (predictions_apply(a)) {
    const RunSpec& r = a.run;
    double mu0 = r.offset.uniform ? 0.5 * (r.offset.lo + r.offset.hi) : r.offset.fixed[0];
    double var0 = r.offset.uniform ? (r.offset.hi - r.offset.lo) * (r.offset.hi - r.offset.lo) / 12.0 : 0.0;
    double sens = r.alpha[0] * a.ioc.r / 2.0;
    double l = r.drift.kind == DriftKind::random_walk ? r.drift.step : 0.0;
    // The update moves eta by (g/s) z, so Delta eta contracts at rate g whatever the sign of alpha.
    double s_abs = std::abs(sens);
    for (std::int64_t t : s.t) {
      res.predicted_mean.push_back(predict_mean(mu0, a.ioc.g, static_cast<double>(t)));
      res.predicted_variance.push_back(predict_variance_recursive(var0, mu0, a.ioc.g, s_abs, l, t));
    }
    double max_z = 0.0, min_ratio = INFINITY, max_ratio = 0.0;
    for (std::size_t row = 1; row < s.t.size(); ++row) {
      double se = s.stderr_delta(0, row);
      if (se > 0) max_z = std::max(max_z, std::abs(s.mean_delta[0][row] - res.predicted_mean[row]) / se);
      if (res.predicted_variance[row] > 0) {
        double ratio = s.var_delta[0][row] / res.predicted_variance[row];
        min_ratio = std::min(min_ratio, ratio);
        max_ratio = std::max(max_ratio, ratio);
      }
    }
    j["prediction_check"] = {{"max_abs_z_mean", max_z},
                             {"min_variance_ratio", std::isfinite(min_ratio) ? min_ratio : 0.0},
                             {"max_variance_ratio", max_ratio},
                             {"stationary_variance", l > 0 || a.ioc.g > 0 ? stationary_variance(a.ioc.g, s_abs, l)
                                                                          : 0.0}};
  }
  return res;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult out;
  for (const ArmConfig& a : cfg.arms) out.arms.push_back(run_arm(a));
  json& j = out.summary;
  j["schema_version"] = kSchemaVersion;
  j["name"] = cfg.name;
  j["description"] = cfg.description;
  j["experiment"] = cfg.experiment;
  j["arms"] = json::array();
  for (std::size_t i = 0; i < out.arms.size(); ++i) {
    json arm = out.arms[i].summary;
    arm["config"] = cfg.arms[i].resolved;
    j["arms"].push_back(arm);
  }
  std::ostringstream d;
  d << cfg.name << ": " << out.arms.size() << (out.arms.size() == 1 ? " arm" : " arms");
  if (cfg.experiment == "qec_513") {
    for (const ArmResult& a : out.arms) {
      d << "; " << a.label << " final survival " << a.summary["final_mean_survival"].get<double>();
    }
  } else if (cfg.experiment == "compare_duty_cycle") {
    for (const ArmResult& a : out.arms) {
      d << "; " << a.label << " median infidelity " << a.stats.experiment_infidelity.median;
    }
  } else {
    for (const ArmResult& a : out.arms) {
      d << "; " << a.label << " final mean|d_eta| " << a.stats.mean_abs_delta[0].back();
    }
  }
  out.digest = d.str();
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error(path.string() + ": cannot open for writing");
  f << content;
  f.close();
  if (!f) throw std::runtime_error(path.string() + ": write failed");
}

std::string summary_csv(const ArmResult& a) {
  const SummaryStats& s = a.stats;
  std::string out =
      "t,param,mean_delta_eta,var_delta_eta,stderr_delta_eta,mean_abs_delta_eta,mean_infidelity,sd_infidelity,"
      "mean_gain,mean_reps,predicted_mean,predicted_variance\n";
  bool pred = !a.predicted_mean.empty();
  for (std::size_t row = 0; row < s.t.size(); ++row) {
    for (std::size_t p = 0; p < s.mean_delta.size(); ++p) {
      out += std::to_string(s.t[row]) + ',' + std::to_string(p) + ',' + fmt(s.mean_delta[p][row]) + ',' +
             fmt(s.var_delta[p][row]) + ',' + fmt(s.stderr_delta(p, row)) + ',' + fmt(s.mean_abs_delta[p][row]) +
             ',' + fmt(s.mean_infidelity[row]) + ',' + fmt(s.sd_infidelity[row]) + ',' + fmt(s.mean_gain[row]) +
             ',' + fmt(s.mean_reps[row]) + ',' + (pred ? fmt(a.predicted_mean[row]) : "") + ',' +
             (pred ? fmt(a.predicted_variance[row]) : "") + '\n';
    }
  }
  return out;
}

std::string trajectories_csv(const ArmResult& a) {
  std::string out = "trajectory,t,param,eta,eta_opt,delta_eta,outcome,gain,reps,infidelity,flags\n";
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const TrajectoryRecord& r = a.records[i];
    for (std::size_t row = 0; row < r.rows(); ++row) {
      for (std::size_t p = 0; p < r.n_params; ++p) {
        std::size_t k = row * r.n_params + p;
        out += std::to_string(i) + ',' + std::to_string(r.t[row]) + ',' + std::to_string(p) + ',' + fmt(r.eta[k]) +
               ',' + fmt(r.eta_opt[k]) + ',' + fmt(r.delta_eta(row, p)) + ',' + std::to_string(r.outcome[row]) +
               ',' + fmt(r.gain[row]) + ',' + std::to_string(r.reps[row]) + ',' + fmt(r.infidelity[row]) + ',' +
               std::to_string(static_cast<int>(r.flags[row])) + '\n';
      }
    }
  }
  return out;
}

}  // namespace

std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                                                 const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::pair<fs::path, fs::path>> staged;
  auto stage = [&](const std::string& name, const std::string& content) {
    fs::path final_path = out_dir / name;
    fs::path tmp = out_dir / ("." + name + ".partial");
    staged.emplace_back(tmp, final_path);
    write_file(tmp, content);
  };
  try {
    for (const ArmResult& a : result.arms) {
      std::string base = sanitize_label(a.label);
      stage(base + ".summary.csv", summary_csv(a));
      if (cfg.trajectory_rows) stage(base + ".trajectories.csv", trajectories_csv(a));
    }
    stage("summary.json", result.summary.dump(2) + "\n");
  } catch (...) {
    std::error_code ec;
    for (const auto& [tmp, fin] : staged) fs::remove(tmp, ec);
    throw;
  }
  std::vector<fs::path> written;
  for (const auto& [tmp, fin] : staged) {
    fs::rename(tmp, fin);
    written.push_back(fin);
  }
  return written;
}

}  // namespace fastcal
