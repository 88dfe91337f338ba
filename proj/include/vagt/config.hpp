#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vagt/ansatz.hpp"
#include "vagt/effective.hpp"
#include "vagt/error.hpp"
#include "vagt/estimator.hpp"
#include "vagt/models.hpp"
#include "vagt/vagt.hpp"

namespace vagt {

/// Time grid: `scale` is "log" or "linear".
struct TimeGrid {
  std::string scale = "linear";
  double first = 0.0;
  double last = 10.0;
  int points = 101;

  std::vector<double> times() const;
};

struct EffectiveSettings {
  std::vector<int> qubits;
  std::vector<int> pinned_bits;
  int states = 20;
  TimeGrid grid{"log", 1.0, 1000.0, 50};
};

struct CorrelationSettings {
  int qubit = 0;
  std::vector<std::string> axes{"x", "z"};
  bool diagonal_only = false;
  TimeGrid grid{"linear", 0.0, 10.0, 101};
};

inline const std::vector<std::string> &known_outputs() {
  static const std::vector<std::string> o = {"htilde-matrix", "energy-levels", "heff",
                                             "fidelities",    "correlations",  "step-dumps"};
  return o;
}

/// Everything one CLI invocation needs. Parsing rejects unknown fields at
/// every level; `to_json` writes every field, defaults included.
struct RunConfig {
  std::string model = "random_2q";
  nlohmann::json model_params = nlohmann::json::object();
  std::string ansatz_name;
  std::optional<nlohmann::json> ansatz_inline;
  int steps = 10;
  double lambda = 1.0;
  EstimatorStrategy strategy;
  std::uint64_t seed = 0;
  std::optional<ResidualKind> residual;
  std::vector<std::string> outputs;
  std::string output_dir = "out";
  int sweep_points = 101;
  EffectiveSettings effective;
  CorrelationSettings correlation;

  bool wants(const std::string &output) const {
    return std::find(outputs.begin(), outputs.end(), output) != outputs.end();
  }
};

inline std::vector<double> TimeGrid::times() const {
  if (points < 1) throw Error(ErrorKind::ConfigError, "time grid needs at least one point");
  if (scale == "linear") return linear_times(first, last, points);
  if (scale != "log") throw Error(ErrorKind::ConfigError, "time grid scale must be log or linear, got '" + scale + "'");
  if (!(first > 0.0 && last > 0.0)) throw Error(ErrorKind::ConfigError, "log time grid needs positive ends");
  return log_times(first, last, points);
}

namespace detail {

inline void reject_unknown(const nlohmann::json &j, const std::string &where, std::initializer_list<const char *> known) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, where + " must be an object");
  for (const auto &[key, value] : j.items())
    if (std::none_of(known.begin(), known.end(), [&](const char *k) { return key == k; }))
      throw Error(ErrorKind::ConfigError, "unknown field '" + key + "' in " + where);
}

template <class T>
void read(const nlohmann::json &j, const char *key, T &out, const std::string &where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception &) {
    throw Error(ErrorKind::ConfigError, where + "." + key + " has the wrong type");
  }
}

inline TimeGrid parse_grid(const nlohmann::json &j, TimeGrid g, const std::string &where) {
  reject_unknown(j, where, {"scale", "first", "last", "points"});
  read(j, "scale", g.scale, where);
  read(j, "first", g.first, where);
  read(j, "last", g.last, where);
  read(j, "points", g.points, where);
  g.times();
  return g;
}

inline nlohmann::json grid_json(const TimeGrid &g) {
  return {{"scale", g.scale}, {"first", g.first}, {"last", g.last}, {"points", g.points}};
}

/// Model parameters with defaults filled in.
inline nlohmann::json resolve_model_params(const std::string &model, const nlohmann::json &given) {
  nlohmann::json p;
  if (model == "low_energy") {
    p = {{"h", -5.0}};
  } else if (model == "spin_chain") {
    p = {{"n", 4}, {"h", 4.5}, {"u0", "eigenbasis"}};
  } else if (model == "random_2q") {
    p = {{"seed", 0}};
  } else if (model == "custom") {
    p = {{"h0", ""}, {"v", ""}};
  } else {
    throw Error(ErrorKind::ConfigError, "unknown model '" + model + "'");
  }
  for (const auto &[key, value] : given.items()) {
    if (!p.contains(key)) throw Error(ErrorKind::ConfigError, "unknown parameter '" + key + "' for model " + model);
    if (p[key].is_number() != value.is_number() || p[key].is_string() != value.is_string())
      throw Error(ErrorKind::ConfigError, "model parameter '" + key + "' has the wrong type");
    p[key] = value;
  }
  if (model == "custom" && (p["h0"].get<std::string>().empty() || p["v"].get<std::string>().empty()))
    throw Error(ErrorKind::ConfigError, "custom model needs h0 and v");
  if (model == "spin_chain" && p["u0"] != "eigenbasis" && p["u0"] != "identity")
    throw Error(ErrorKind::ConfigError, "spin_chain u0 must be eigenbasis or identity");
  return p;
}

inline std::string default_ansatz(const std::string &model) {
  if (model == "low_energy") return "lowenergy36";
  if (model == "spin_chain") return "spinchain140";
  if (model == "random_2q") return "universal2q15";
  return "";
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json &j) {
  detail::reject_unknown(j, "config",
                         {"model", "ansatz", "steps", "lambda", "strategy", "seed", "residual", "outputs", "output_dir",
                          "sweep", "effective", "correlation"});
  RunConfig c;
  if (!j.contains("model")) throw Error(ErrorKind::ConfigError, "config.model is required");
  const nlohmann::json &m = j.at("model");
  if (!m.is_object() || !m.contains("name") || !m.at("name").is_string())
    throw Error(ErrorKind::ConfigError, "config.model needs a string name");
  c.model = m.at("name").get<std::string>();
  nlohmann::json given = m;
  given.erase("name");
  c.model_params = detail::resolve_model_params(c.model, given);

  if (j.contains("ansatz")) {
    const nlohmann::json &a = j.at("ansatz");
    if (a.is_string()) {
      c.ansatz_name = a.get<std::string>();
    } else if (a.is_object()) {
      c.ansatz_inline = a;
      c.ansatz_name = a.value("name", std::string("custom"));
    } else {
      throw Error(ErrorKind::ConfigError, "config.ansatz must be a builtin name or an object");
    }
  } else {
    c.ansatz_name = detail::default_ansatz(c.model);
    if (c.ansatz_name.empty()) throw Error(ErrorKind::ConfigError, "config.ansatz is required for custom models");
  }

  detail::read(j, "steps", c.steps, "config");
  detail::read(j, "lambda", c.lambda, "config");
  detail::read(j, "seed", c.seed, "config");
  if (c.steps < 1) throw Error(ErrorKind::ConfigError, "config.steps must be at least 1");
  if (!std::isfinite(c.lambda)) throw Error(ErrorKind::ConfigError, "config.lambda must be finite");

  if (j.contains("strategy")) {
    const nlohmann::json &s = j.at("strategy");
    if (s.is_string()) {
      c.strategy.mode = parse_strategy_mode(s.get<std::string>());
    } else {
      detail::reject_unknown(s, "strategy", {"mode", "shots", "symmetric_shortcut", "direct_measurement", "cutoff"});
      std::string mode = to_string(c.strategy.mode);
      detail::read(s, "mode", mode, "strategy");
      c.strategy.mode = parse_strategy_mode(mode);
      detail::read(s, "shots", c.strategy.shots, "strategy");
      detail::read(s, "symmetric_shortcut", c.strategy.symmetric_shortcut, "strategy");
      detail::read(s, "cutoff", c.strategy.cutoff, "strategy");
      detail::read(s, "direct_measurement", c.strategy.direct_measurement, "strategy");
    }
  }
  if (c.strategy.mode == StrategyMode::CircuitShots && c.strategy.shots == 0)
    throw Error(ErrorKind::ConfigError, "circuit-shots needs strategy.shots > 0");
  if (!(c.strategy.cutoff > 0.0 && c.strategy.cutoff < 1.0))
    throw Error(ErrorKind::ConfigError, "strategy.cutoff must lie in (0, 1)");

  if (j.contains("residual")) {
    std::string r;
    detail::read(j, "residual", r, "config");
    c.residual = parse_residual_kind(r);
  }
  detail::read(j, "outputs", c.outputs, "config");
  for (const std::string &o : c.outputs)
    if (std::find(known_outputs().begin(), known_outputs().end(), o) == known_outputs().end())
      throw Error(ErrorKind::ConfigError, "unknown output '" + o + "'");
  detail::read(j, "output_dir", c.output_dir, "config");

  if (j.contains("sweep")) {
    detail::reject_unknown(j.at("sweep"), "sweep", {"points"});
    detail::read(j.at("sweep"), "points", c.sweep_points, "sweep");
  }
  if (c.sweep_points < 2) throw Error(ErrorKind::ConfigError, "sweep.points must be at least 2");

  if (j.contains("effective")) {
    const nlohmann::json &e = j.at("effective");
    detail::reject_unknown(e, "effective", {"qubits", "pinned_bits", "states", "times"});
    detail::read(e, "qubits", c.effective.qubits, "effective");
    detail::read(e, "pinned_bits", c.effective.pinned_bits, "effective");
    detail::read(e, "states", c.effective.states, "effective");
    if (e.contains("times")) c.effective.grid = detail::parse_grid(e.at("times"), c.effective.grid, "effective.times");
  }
  if (c.effective.states < 1) throw Error(ErrorKind::ConfigError, "effective.states must be positive");

  if (j.contains("correlation")) {
    const nlohmann::json &e = j.at("correlation");
    detail::reject_unknown(e, "correlation", {"qubit", "axes", "diagonal_only", "times"});
    detail::read(e, "qubit", c.correlation.qubit, "correlation");
    detail::read(e, "axes", c.correlation.axes, "correlation");
    detail::read(e, "diagonal_only", c.correlation.diagonal_only, "correlation");
    if (e.contains("times"))
      c.correlation.grid = detail::parse_grid(e.at("times"), c.correlation.grid, "correlation.times");
  }
  for (const std::string &a : c.correlation.axes)
    if (a != "x" && a != "y" && a != "z") throw Error(ErrorKind::ConfigError, "correlation axis '" + a + "'");
  return c;
}

/// Reads and parses a config file. Malformed JSON reports nlohmann's byte
/// position and line/column.
inline RunConfig load_run_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error &e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
  return parse_run_config(j);
}

inline nlohmann::json to_json(const RunConfig &c) {
  nlohmann::json model = c.model_params;
  model["name"] = c.model;
  nlohmann::json j;
  j["model"] = model;
  j["ansatz"] = c.ansatz_inline ? *c.ansatz_inline : nlohmann::json(c.ansatz_name);
  j["steps"] = c.steps;
  j["lambda"] = c.lambda;
  j["strategy"] = {{"mode", to_string(c.strategy.mode)},
                   {"shots", c.strategy.shots},
                   {"symmetric_shortcut", c.strategy.symmetric_shortcut},
                   {"cutoff", c.strategy.cutoff},
                   {"direct_measurement", c.strategy.direct_measurement}};
  j["seed"] = c.seed;
  j["residual"] = c.residual ? nlohmann::json(to_string(*c.residual)) : nlohmann::json(nullptr);
  j["outputs"] = c.outputs;
  j["output_dir"] = c.output_dir;
  j["sweep"] = {{"points", c.sweep_points}};
  j["effective"] = {{"qubits", c.effective.qubits},
                    {"pinned_bits", c.effective.pinned_bits},
                    {"states", c.effective.states},
                    {"times", detail::grid_json(c.effective.grid)}};
  j["correlation"] = {{"qubit", c.correlation.qubit},
                      {"axes", c.correlation.axes},
                      {"diagonal_only", c.correlation.diagonal_only},
                      {"times", detail::grid_json(c.correlation.grid)}};
  return j;
}

inline HamiltonianPair build_model(const RunConfig &c) {
  const nlohmann::json &p = c.model_params;
  if (c.model == "low_energy") return model_low_energy(p.at("h").get<double>(), c.lambda);
  if (c.model == "spin_chain") {
    HamiltonianPair pair = model_spin_chain(p.at("n").get<int>(), p.at("h").get<double>(), c.lambda);
    if (p.at("u0") == "identity") pair.u0_dense.reset();
    return pair;
  }
  if (c.model == "random_2q") return model_random_2q(p.at("seed").get<std::uint64_t>(), c.lambda);
  return model_custom(p.at("h0").get<std::string>(), p.at("v").get<std::string>(), c.lambda);
}

inline AnsatzSpec build_ansatz(const RunConfig &c, int n_qubits) {
  if (c.ansatz_inline) return ansatz_from_json(*c.ansatz_inline);
  return builtin_ansatz(c.ansatz_name, n_qubits);
}

inline VagtConfig to_vagt_config(const RunConfig &c) {
  VagtConfig v;
  v.pair = build_model(c);
  v.spec = build_ansatz(c, v.pair.n_qubits);
  v.steps = c.steps;
  v.lambda = c.lambda;
  v.strategy = c.strategy;
  v.seed = c.seed;
  v.residual = c.residual;
  v.keep_step_htilde = c.wants("step-dumps");
  return v;
}

/// Effective qubits default to all but the last; pinned bits default to 0.
inline LowEnergyProjector build_projector(const RunConfig &c, int n_qubits) {
  std::vector<int> eff = c.effective.qubits;
  if (eff.empty())
    for (int q = 0; q + 1 < n_qubits; ++q) eff.push_back(q);
  std::vector<int> bits = c.effective.pinned_bits;
  if (bits.empty()) bits.assign(static_cast<std::size_t>(n_qubits) - std::min<std::size_t>(eff.size(), n_qubits), 0);
  try {
    return LowEnergyProjector(n_qubits, eff, bits);
  } catch (const Error &e) {
    throw Error(ErrorKind::ConfigError, std::string("effective: ") + e.what());
  }
}

}  // namespace vagt
