#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vagt/ansatz.hpp"
#include "vagt/cheap_n2.hpp"
#include "vagt/dense.hpp"
#include "vagt/estimator.hpp"
#include "vagt/models.hpp"
#include "vagt/pauli.hpp"

namespace vagt {

/// How the block structure of H~ is read off: every basis state on its own
/// (full diagonalization), clusters of equal diagonal U0^dag H0 U0 energies,
/// or the model's symmetry sector labels.
enum class ResidualKind { Full, Energy, Sectors };

inline const char *to_string(ResidualKind k) {
  switch (k) {
    case ResidualKind::Full: return "full";
    case ResidualKind::Energy: return "energy";
    case ResidualKind::Sectors: return "sectors";
  }
  return "?";
}

inline ResidualKind parse_residual_kind(const std::string &s) {
  for (ResidualKind k : {ResidualKind::Full, ResidualKind::Energy, ResidualKind::Sectors})
    if (s == to_string(k)) return k;
  throw Error(ErrorKind::UnknownName, "unknown residual kind '" + s + "'");
}

inline ResidualKind default_residual_kind(const HamiltonianPair &pair) {
  if (!pair.sector_labels.empty()) return ResidualKind::Sectors;
  if (pair.name == "random_2q") return ResidualKind::Full;
  return ResidualKind::Energy;
}

struct VagtConfig {
  HamiltonianPair pair;
  AnsatzSpec spec;
  int steps = 1;
  double lambda = 0.0;
  EstimatorStrategy strategy;
  std::uint64_t seed = 0;
  std::optional<ResidualKind> residual;
  /// Keep every X, b and beta.
  bool keep_systems = false;
  /// Keep H~ after every step.
  bool keep_step_htilde = false;
};

struct StepRecord {
  int t = 0;
  double mu = 0.0;
  double solve_residual = 0.0;
  double cost_zero = 0.0;
  double cost_solved = 0.0;
  /// Block residual of H~ at mu_{t+1} with the updated parameters.
  double block_residual = 0.0;
  int rank = 0;
  bool psd_warning = false;
  CircuitCount circuits;
};

struct VagtResult {
  HamiltonianPair pair;
  AnsatzSpec spec;
  ParamTable params;
  std::vector<StepRecord> steps;
  std::vector<StepSystem> systems;
  std::vector<DenseOp> step_htilde;
  /// U0 e_1 .. e_M at alpha_T; the circuit exists when U0 is one.
  std::optional<Circuit> circuit;
  Circuit rotations{1};
  DenseOp unitary;
  DenseOp htilde_dense;
  PauliSum htilde{1};
  Eigen::VectorXd exact_eigenvalues;
  ResidualKind residual_kind = ResidualKind::Full;
  std::vector<int> block_labels;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  CircuitCount total_circuits;
  int psd_warnings = 0;
  double wall_seconds = 0.0;

  /// Diagonal of H~, the eigenvalue estimates of full diagonalization.
  Eigen::VectorXd diagonal() const { return htilde_dense.diagonal().real(); }
};

/// Frobenius norm of P H (1 - P).
inline double off_block_residual(const DenseOp &h, const DenseOp &p) {
  if (h.rows() != h.cols() || p.rows() != h.rows() || p.cols() != h.cols())
    throw Error(ErrorKind::SizeMismatch, "projector and operator dimensions");
  if ((p * p - p).cwiseAbs().maxCoeff() > 1e-12 || (p - p.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw Error(ErrorKind::NotProjector, "P is not an orthogonal projector");
  const DenseOp q = DenseOp::Identity(h.rows(), h.cols()) - p;
  return (p * h * q).norm();
}

/// Frobenius norm of the entries H_ij with labels[i] != labels[j].
inline double label_block_residual(const DenseOp &h, const std::vector<int> &labels) {
  if (static_cast<Eigen::Index>(labels.size()) != h.rows()) throw Error(ErrorKind::SizeMismatch, "block label count");
  double s = 0.0;
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    for (Eigen::Index j = 0; j < h.cols(); ++j)
      if (labels[static_cast<std::size_t>(i)] != labels[static_cast<std::size_t>(j)]) s += std::norm(h(i, j));
  return std::sqrt(s);
}

/// Labels of the U0 columns for the chosen block structure.
inline std::vector<int> block_labels(const HamiltonianPair &pair, const AnsatzSpec &spec, ResidualKind kind) {
  const Eigen::Index dim = Eigen::Index{1} << pair.n_qubits;
  std::vector<int> labels(static_cast<std::size_t>(dim));
  switch (kind) {
    case ResidualKind::Full:
      for (Eigen::Index i = 0; i < dim; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i);
      return labels;
    case ResidualKind::Sectors:
      if (static_cast<Eigen::Index>(pair.sector_labels.size()) != dim)
        throw Error(ErrorKind::ConfigError, "model '" + pair.name + "' has no sector labels");
      return pair.sector_labels;
    case ResidualKind::Energy: {
      const DenseOp u0 = spec.u0_matrix();
      const Eigen::VectorXd e = (u0.adjoint() * to_dense(pair.h0) * u0).diagonal().real();
      std::map<long long, int> ids;
      for (Eigen::Index i = 0; i < dim; ++i) ids.emplace(std::llround(e(i) * 1e8), 0);
      int next = 0;
      for (auto &[key, id] : ids) id = next++;
      for (Eigen::Index i = 0; i < dim; ++i) labels[static_cast<std::size_t>(i)] = ids[std::llround(e(i) * 1e8)];
      return labels;
    }
  }
  return labels;
}

/// A_t = sum_c (alpha_{t+1,c} - alpha_{t,c}) / dmu O_c at the parameters of row t.
inline PauliSum gauge_potential(const ParamTable &table, const AnsatzSpec &spec, int t) {
  if (t < 0 || t >= table.steps()) throw Error(ErrorKind::IndexOutOfRange, "gauge potential step " + std::to_string(t));
  const Eigen::VectorXd row = table.row(t);
  const Eigen::VectorXd rate = (table.row(t + 1) - row) / table.delta_mu;
  PauliSum a(spec.n_qubits);
  for (int m = 1; m <= spec.n_members(); ++m) {
    const double r = rate(spec.column_of[static_cast<std::size_t>(m - 1)]);
    if (r != 0.0) a += rotated_generator(spec, row, m) * cplx(r, 0.0);
  }
  return a;
}

/// U^dag H U, hermitized.
inline DenseOp rotate_hamiltonian(const DenseOp &h, const DenseOp &u) {
  const DenseOp r = u.adjoint() * h * u;
  return 0.5 * (r + r.adjoint());
}

namespace detail {

/// One system per step with the engine built once per run.
class StepBuilder {
 public:
  StepBuilder(const HamiltonianPair &pair, const AnsatzSpec &spec, const EstimatorStrategy &strategy)
      : pair_(pair), spec_(spec), strategy_(strategy) {
    double v2 = 0.0;
    for (const auto &[code, c] : pair.v.terms()) v2 += std::norm(c);
    v_norm2_ = std::ldexp(v2, pair.n_qubits);
    switch (strategy.mode) {
      case StrategyMode::Analytic: analytic_.emplace(pair, spec); break;
      case StrategyMode::CircuitExact:
      case StrategyMode::CircuitShots: circuit_.emplace(pair, spec, strategy); break;
      case StrategyMode::CheapN2:
        require_two_qubits(spec.n_qubits);
        if (!spec.has_circuit_u0()) throw Error(ErrorKind::NonCircuitU0, "cheap-n2 needs U0 as a circuit");
        table_.emplace(build_structure_table(2));
        break;
    }
  }

  StepSystem build(const Eigen::VectorXd &row, int t, double mu) const {
    if (strategy_.mode == StrategyMode::CheapN2) return build_cheap_step(pair_, spec_, row, t, mu, strategy_, *table_);
    StepSystem s;
    s.t = t;
    s.mu = mu;
    if (analytic_) {
      const Eigen::MatrixXd q = analytic_->q_columns(row, mu);
      s.X = analytic_->dim() * q.transpose() * q;
      s.b = -analytic_->dim() * q.transpose() * analytic_->v();
      s.circuits = step_budget(pair_, spec_, mu);
    } else {
      s.b = circuit_->build_b(row, t, mu, &s.circuits);
      s.X = circuit_->build_X(row, t, mu, &s.circuits);
      s.shot_se = circuit_->shot_standard_error(mu);
    }
    const SolveResult r = solve_step(s.X, s.b, s.shot_se, strategy_.cutoff);
    s.beta = r.beta;
    s.residual = r.residual;
    s.rank = r.rank;
    s.negative_eigenvalues = r.negative_eigenvalues;
    s.psd_warning = r.psd_warning;
    fill_costs(s, v_norm2_);
    return s;
  }

 private:
  const HamiltonianPair &pair_;
  const AnsatzSpec &spec_;
  EstimatorStrategy strategy_;
  double v_norm2_ = 0.0;
  std::optional<AnalyticEngine> analytic_;
  std::optional<CircuitEngine> circuit_;
  std::optional<StructureTable> table_;
};

}  // namespace detail

/// Explicit Euler in mu: alpha_{t+1} = alpha_t + beta_t dmu from alpha_0 = 0.
inline VagtResult run(const VagtConfig &config) {
  const auto start = std::chrono::steady_clock::now();
  if (config.steps < 1) throw Error(ErrorKind::InvalidArgument, "T must be at least 1");
  if (!std::isfinite(config.lambda)) throw Error(ErrorKind::InvalidArgument, "lambda must be finite");
  if (config.pair.n_qubits != config.spec.n_qubits)
    throw Error(ErrorKind::SizeMismatch, "model and ansatz sizes differ");
  VagtResult res;
  res.pair = config.pair;
  res.pair.lambda = config.lambda;
  res.spec = config.spec;
  if (res.spec.has_circuit_u0() && res.spec.u0.empty()) {
    if (res.pair.u0_circuit)
      res.spec.u0 = *res.pair.u0_circuit;
    else if (res.pair.u0_dense)
      res.spec.u0_dense = res.pair.u0_dense;
  }
  res.spec.validate();
  EstimatorStrategy strategy = config.strategy;
  strategy.seed = config.seed;

  const HamiltonianPair &pair = res.pair;
  const AnsatzSpec &spec = res.spec;
  res.params = ParamTable(config.steps, spec.n_params(), config.lambda);
  res.residual_kind = config.residual.value_or(default_residual_kind(pair));
  res.block_labels = block_labels(pair, spec, res.residual_kind);
  const DenseOp u0 = spec.u0_matrix();
  res.initial_residual = label_block_residual(rotate_hamiltonian(pair.dense(config.lambda), u0), res.block_labels);

  const detail::StepBuilder builder(pair, spec, strategy);
  const double dmu = res.params.delta_mu;
  for (int t = 0; t < config.steps; ++t) {
    const double mu = t * dmu;
    const Eigen::VectorXd row = res.params.row(t);
    StepSystem s;
    try {
      s = builder.build(row, t, mu);
    } catch (const Error &e) {
      if (e.kind() == ErrorKind::NumericalBreakdown)
        throw Error(ErrorKind::NumericalBreakdown, "step " + std::to_string(t) + ": " + e.what());
      throw;
    }
    const Eigen::VectorXd next = row + s.beta * dmu;
    if (!next.allFinite()) throw Error(ErrorKind::NumericalBreakdown, "step " + std::to_string(t) + ": non-finite parameters");
    res.params.alpha.row(t + 1) = next.transpose();

    const DenseOp h_next = rotate_hamiltonian(pair.dense((t + 1) * dmu), full_unitary_matrix(spec, next));
    StepRecord rec;
    rec.t = t;
    rec.mu = mu;
    rec.solve_residual = s.residual;
    rec.cost_zero = s.cost_zero;
    rec.cost_solved = s.cost_solved;
    rec.block_residual = label_block_residual(h_next, res.block_labels);
    rec.rank = s.rank;
    rec.psd_warning = s.psd_warning;
    rec.circuits = s.circuits;
    res.total_circuits.n_b += s.circuits.n_b;
    res.total_circuits.n_x += s.circuits.n_x;
    res.total_circuits.n_base += s.circuits.n_base;
    if (s.psd_warning) ++res.psd_warnings;
    res.steps.push_back(rec);
    if (config.keep_step_htilde) res.step_htilde.push_back(h_next);
    if (config.keep_systems) res.systems.push_back(std::move(s));
  }

  const Eigen::VectorXd last = res.params.row(config.steps);
  res.rotations = rotation_circuit(spec, last, spec.n_members() + 1);
  if (spec.has_circuit_u0()) res.circuit = full_unitary(spec, last);
  res.unitary = u0 * res.rotations.to_matrix();
  const DenseOp h = pair.dense(config.lambda);
  res.htilde_dense = rotate_hamiltonian(h, res.unitary);
  res.htilde = decompose(res.htilde_dense);
  res.exact_eigenvalues = eigenvalues(h);
  res.final_residual = label_block_residual(res.htilde_dense, res.block_labels);
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

/// Rows (mu, e_1 .. e_{2^N}) of ascending dense eigenvalues of H_mu.
inline Eigen::MatrixXd energy_levels(const HamiltonianPair &pair, const std::vector<double> &mus) {
  for (std::size_t i = 1; i < mus.size(); ++i)
    if (!(mus[i] > mus[i - 1])) throw Error(ErrorKind::InvalidArgument, "mu grid must be strictly increasing");
  const Eigen::Index dim = Eigen::Index{1} << pair.n_qubits;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(mus.size()), dim + 1);
  for (std::size_t i = 0; i < mus.size(); ++i) {
    out(static_cast<Eigen::Index>(i), 0) = mus[i];
    out.row(static_cast<Eigen::Index>(i)).tail(dim) = eigenvalues(pair.dense(mus[i])).transpose();
  }
  return out;
}

}  // namespace vagt
