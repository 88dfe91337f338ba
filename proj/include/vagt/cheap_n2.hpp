#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <vector>

#include "vagt/ansatz.hpp"
#include "vagt/estimator.hpp"
#include "vagt/models.hpp"
#include "vagt/parallel.hpp"
#include "vagt/pauli.hpp"
#include "vagt/simulator.hpp"

namespace vagt {

/// Least-squares form of one step: minimize (V + Q beta)^T (V + Q beta) with
/// V and the columns of Q written in the 16-string two-qubit Pauli basis.
struct RegressionSystem {
  Eigen::VectorXd v_vec;
  Eigen::MatrixXd q_mat;
  Eigen::VectorXd beta;
};

namespace detail {

inline void require_two_qubits(int n) {
  if (n != 2) throw Error(ErrorKind::OnlyTwoQubits, "the reduced scheme is defined for two qubits");
}

inline double sampled_pm_one(double expectation, const std::optional<ShotSampler> &sampler) {
  if (!sampler) return expectation;
  const double p = std::clamp(0.5 * (1.0 + expectation), 0.0, 1.0);
  const auto counts = draw_counts({p, 1.0 - p}, *sampler);
  return 2.0 * static_cast<double>(counts[0]) / static_cast<double>(sampler->shots) - 1.0;
}

}  // namespace detail

struct BaseOptions {
  /// Measure sigma_h (x) B on (1 (x) U^dag)|phi> instead of the ancilla test.
  bool direct = false;
  /// Per-string samplers are derived from this one when present.
  std::optional<ShotSampler> sampler;
};

/// <phi| sigma_h (x) U^k B^k U^k^dag |phi> for all 16 strings sigma_h; k is the
/// 1-based member index.
inline Eigen::VectorXd base_expectations(const AnsatzSpec &spec, const Eigen::VectorXd &row, int k,
                                         const BaseOptions &options = {}) {
  detail::require_two_qubits(spec.n_qubits);
  if (k < 1 || k > spec.n_members()) throw Error(ErrorKind::IndexOutOfRange, "member index");
  const Circuit u = partial_unitary(spec, row, k);
  const PauliString &b = spec.generators[static_cast<std::size_t>(k - 1)];
  Eigen::VectorXd out(16);
  std::optional<StateVector> rotated;
  if (options.direct) {
    StateVector s = prepare_phi(2);
    Circuit inv(4);
    inv.append(u.inverse(), 2);
    s.apply(inv);
    rotated = s;
  }
  for (std::uint64_t h = 0; h < 16; ++h) {
    std::optional<ShotSampler> sampler;
    if (options.sampler) sampler = options.sampler->derive({h});
    const PauliString sh(2, h);
    if (options.direct) {
      const double e = expectation(*rotated, PauliString(4, (h << 4) | b.code()));
      out(static_cast<Eigen::Index>(h)) = detail::sampled_pm_one(e, sampler);
    } else {
      out(static_cast<Eigen::Index>(h)) = ry_test(u, b, sh, sampler).value;
    }
  }
  return out;
}

/// q_j = sum_l h_l Tr(sigma_j i[O, sigma_l]) / 4 from the base values. With
/// [sigma_l, sigma_j] = c sigma_h this is sum_l h_l i c s_h base_h, where
/// c = s_l F_{ljh} comes from the transpose-commutator table.
inline Eigen::VectorXd reconstruct_q(const Eigen::VectorXd &base, const StructureTable &table, const PauliSum &h) {
  detail::require_two_qubits(table.n_qubits());
  if (base.size() != 16 || h.n_qubits() != 2) throw Error(ErrorKind::SizeMismatch, "reconstruct_q expects N=2 data");
  Eigen::VectorXd q = Eigen::VectorXd::Zero(16);
  for (const auto &[l, hl] : h.terms()) {
    const double sl = transpose_parity(PauliString(2, l));
    for (std::uint64_t j = 0; j < 16; ++j) {
      const auto &e = table.entry(l, j);
      if (!e) continue;
      const cplx c = sl * e->coefficient;
      const double sh = transpose_parity(PauliString(2, e->h));
      const cplx term = hl.real() * cplx(0.0, 1.0) * c * sh * base(static_cast<Eigen::Index>(e->h));
      q(static_cast<Eigen::Index>(j)) += term.real();
    }
  }
  return q;
}

/// Minimizes (V + Q beta)^T (V + Q beta) by SVD; singular values at or below
/// sqrt(cutoff) of the largest are dropped, which matches solve_step on the
/// normal equations.
inline SolveResult solve_regression(RegressionSystem &sys, double cutoff = kSolveCutoff) {
  if (sys.q_mat.rows() != sys.v_vec.size()) throw Error(ErrorKind::SizeMismatch, "regression dimensions");
  if (!sys.q_mat.allFinite() || !sys.v_vec.allFinite())
    throw Error(ErrorKind::NumericalBreakdown, "non-finite regression data");
  SolveResult out;
  const Eigen::Index p = sys.q_mat.cols();
  out.beta = Eigen::VectorXd::Zero(p);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.q_mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd &sv = svd.singularValues();
  const double smax = sv.size() ? sv.maxCoeff() : 0.0;
  const double keep = std::sqrt(cutoff) * smax;
  const Eigen::VectorXd ut = svd.matrixU().transpose() * sys.v_vec;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (smax > 0.0 && sv(i) > keep) {
      out.beta -= svd.matrixV().col(i) * (ut(i) / sv(i));
      ++out.rank;
    }
  }
  const Eigen::VectorXd r = sys.q_mat.transpose() * (sys.v_vec + sys.q_mat * out.beta);
  out.residual = r.norm();
  sys.beta = out.beta;
  return out;
}

/// Builds the regression for one step: 16 base values per member, then
/// classical reconstruction of every q row.
inline RegressionSystem build_regression(const HamiltonianPair &pair, const AnsatzSpec &spec, const Eigen::VectorXd &row,
                                         int t, double mu, const EstimatorStrategy &strategy,
                                         const StructureTable &table, CircuitCount *count = nullptr) {
  detail::require_two_qubits(spec.n_qubits);
  const PauliSum h = pair.h_mu(mu);
  const int m_count = spec.n_members();
  std::vector<Eigen::VectorXd> member_q(static_cast<std::size_t>(m_count));
  parallel_for(static_cast<std::size_t>(m_count), [&](std::size_t m) {
    BaseOptions opts;
    opts.direct = strategy.direct_measurement;
    if (strategy.shots > 0)
      opts.sampler = ShotSampler{derive_seed(strategy.seed, {static_cast<std::uint64_t>(t), detail::kSeedBase, m}),
                                 strategy.shots};
    member_q[m] = reconstruct_q(base_expectations(spec, row, static_cast<int>(m) + 1, opts), table, h);
  });
  RegressionSystem sys;
  sys.v_vec = pauli_vec::from_sum(pair.v);
  sys.q_mat = Eigen::MatrixXd::Zero(16, spec.n_params());
  for (int m = 0; m < m_count; ++m)
    sys.q_mat.col(spec.column_of[static_cast<std::size_t>(m)]) += member_q[static_cast<std::size_t>(m)];
  if (count) count->n_base += 16 * static_cast<std::uint64_t>(m_count);
  return sys;
}

inline StepSystem build_cheap_step(const HamiltonianPair &pair, const AnsatzSpec &spec, const Eigen::VectorXd &row,
                                   int t, double mu, const EstimatorStrategy &strategy, const StructureTable &table) {
  StepSystem s;
  s.t = t;
  s.mu = mu;
  RegressionSystem sys = build_regression(pair, spec, row, t, mu, strategy, table, &s.circuits);
  const SolveResult r = solve_regression(sys, strategy.cutoff);
  s.X = 4.0 * sys.q_mat.transpose() * sys.q_mat;
  s.b = -4.0 * sys.q_mat.transpose() * sys.v_vec;
  s.beta = r.beta;
  s.rank = r.rank;
  s.residual = (s.X * s.beta - s.b).norm();
  fill_costs(s, 4.0 * sys.v_vec.squaredNorm());
  return s;
}

}  // namespace vagt
