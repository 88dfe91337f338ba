#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <string>
#include <vector>

#include "vagt/config.hpp"
#include "vagt/effective.hpp"
#include "vagt/vagt.hpp"

namespace vagt {

inline nlohmann::json terms_json(const PauliSum &s) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto &[code, c] : s.terms()) {
    const std::string key = PauliString(s.n_qubits(), code).str();
    j[key] = c.imag() == 0.0 ? nlohmann::json(c.real()) : nlohmann::json{c.real(), c.imag()};
  }
  return j;
}

inline nlohmann::json matrix_json(const Eigen::MatrixXd &m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index k = 0; k < m.cols(); ++k) r[static_cast<std::size_t>(k)] = m(i, k);
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<double> to_vector(const Eigen::VectorXd &v) { return {v.data(), v.data() + v.size()}; }

/// Everything except wall-clock time, so equal inputs give equal bytes.
inline nlohmann::json result_json(const VagtResult &r, const RunConfig &config) {
  nlohmann::json j;
  j["config"] = to_json(config);
  j["seed"] = config.seed;
  j["model"] = {{"name", r.pair.name},
                {"n_qubits", r.pair.n_qubits},
                {"params", r.pair.params},
                {"lambda", r.pair.lambda},
                {"h0", terms_json(r.pair.h0)},
                {"v", terms_json(r.pair.v)},
                {"u0_mode", r.spec.has_circuit_u0() ? "circuit" : "matrix"}};
  j["ansatz"] = ansatz_to_json(r.spec);
  j["ansatz"]["n_params"] = r.spec.n_params();
  j["alpha"] = matrix_json(r.params.alpha);
  j["delta_mu"] = r.params.delta_mu;
  j["h_tilde"] = {{"terms", terms_json(r.htilde)},
                  {"real", matrix_json(r.htilde_dense.real())},
                  {"imag", matrix_json(r.htilde_dense.imag())}};
  nlohmann::json steps = nlohmann::json::array();
  for (const StepRecord &s : r.steps)
    steps.push_back({{"t", s.t},
                     {"mu", s.mu},
                     {"cost_zero", s.cost_zero},
                     {"cost_solved", s.cost_solved},
                     {"solve_residual", s.solve_residual},
                     {"block_residual", s.block_residual},
                     {"rank", s.rank},
                     {"psd_warning", s.psd_warning},
                     {"n_b", s.circuits.n_b},
                     {"n_x", s.circuits.n_x},
                     {"n_base", s.circuits.n_base}});
  j["steps"] = steps;
  j["residuals"] = {{"kind", to_string(r.residual_kind)},
                    {"block_labels", r.block_labels},
                    {"initial", r.initial_residual},
                    {"final", r.final_residual},
                    {"offdiag_frobenius", offdiag_norm(r.htilde_dense)},
                    {"frobenius", r.htilde_dense.norm()}};
  j["eigenvalues"] = {{"exact", to_vector(r.exact_eigenvalues)}, {"diagonal", to_vector(r.diagonal())}};
  j["circuits"] = {{"n_b", r.total_circuits.n_b}, {"n_x", r.total_circuits.n_x}, {"n_base", r.total_circuits.n_base}};
  j["psd_warnings"] = r.psd_warnings;
  return j;
}

inline nlohmann::json heff_json(const EffectiveHamiltonian &h, const LowEnergyProjector &p, const VagtResult &r) {
  return {{"effective_qubits", p.effective()},
          {"pinned_qubits", p.pinned()},
          {"pinned_bits", p.pinned_bits()},
          {"terms", terms_json(h.terms)},
          {"eigenvalues", to_vector(eigenvalues(h.dense()))},
          {"block_eigenvalues", to_vector(eigenvalues(p.restrict(r.htilde_dense)))}};
}

/// Plain CSV with a header row and round-trip precision.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path &path, const std::vector<std::string> &header) : out_(path) {
    if (!out_) throw Error(ErrorKind::ConfigError, "cannot write " + path.string());
    out_ << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  void row(const std::vector<double> &values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << values[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

inline void write_json(const std::filesystem::path &path, const nlohmann::json &j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline void write_energy_levels(const std::filesystem::path &path, const Eigen::MatrixXd &levels) {
  std::vector<std::string> header{"mu"};
  for (Eigen::Index k = 1; k < levels.cols(); ++k) header.push_back("e" + std::to_string(k));
  CsvWriter w(path, header);
  for (Eigen::Index i = 0; i < levels.rows(); ++i) w.row(to_vector(levels.row(i).transpose()));
}

/// |H~_ij| as a square table.
inline void write_htilde_matrix(const std::filesystem::path &path, const DenseOp &h) {
  std::vector<std::string> header;
  for (Eigen::Index k = 0; k < h.cols(); ++k) header.push_back("c" + std::to_string(k));
  CsvWriter w(path, header);
  for (Eigen::Index i = 0; i < h.rows(); ++i) w.row(to_vector(h.row(i).cwiseAbs().transpose()));
}

inline void write_stats(const std::filesystem::path &path, const std::vector<double> &times, const SeriesStats &s) {
  CsvWriter w(path, {"t", "mean", "ci_low", "ci_high"});
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    w.row({times[i], s.mean(k), s.lo(k), s.hi(k)});
  }
}

inline void write_correlations(const std::filesystem::path &path, const std::vector<std::string> &axes,
                               const std::vector<CorrelationSeries> &series) {
  std::vector<std::string> header{"t"};
  for (const std::string &a : axes) header.push_back("C_" + a);
  CsvWriter w(path, header);
  if (series.empty()) return;
  for (std::size_t i = 0; i < series.front().times.size(); ++i) {
    std::vector<double> row{series.front().times[i]};
    for (const auto &s : series) row.push_back(s.values[i]);
    w.row(row);
  }
}

inline void write_steps(const std::filesystem::path &path, const VagtResult &r) {
  CsvWriter w(path, {"t", "mu", "cost_zero", "cost_solved", "block_residual", "rank", "n_b", "n_x", "n_base"});
  for (const StepRecord &s : r.steps)
    w.row({static_cast<double>(s.t), s.mu, s.cost_zero, s.cost_solved, s.block_residual, static_cast<double>(s.rank),
           static_cast<double>(s.circuits.n_b), static_cast<double>(s.circuits.n_x),
           static_cast<double>(s.circuits.n_base)});
}

/// One Pauli decomposition of H~ per step, for the coefficient-flow plots.
inline void write_step_htilde(const std::filesystem::path &path, const VagtResult &r) {
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t t = 0; t < r.step_htilde.size(); ++t)
    j.push_back({{"t", t + 1}, {"mu", static_cast<double>(t + 1) * r.params.delta_mu}, {"terms", terms_json(decompose(r.step_htilde[t]))}});
  write_json(path, j);
}

}  // namespace vagt
