#pragma once

#include <Eigen/Dense>

#include <vector>

#include "vagt/ansatz.hpp"
#include "vagt/dense.hpp"
#include "vagt/models.hpp"

namespace vagt {

/// Dense i[O_c, H_mu] per parameter column, with O_m = U_m B_m U_m^dag.
inline std::vector<DenseOp> dense_generator_commutators(const HamiltonianPair &pair, const AnsatzSpec &spec,
                                                        const Eigen::VectorXd &row, double mu) {
  if (pair.n_qubits != spec.n_qubits) throw Error(ErrorKind::SizeMismatch, "model and ansatz sizes differ");
  detail::check_row(spec, row);
  const DenseOp h = pair.dense(mu);
  const Eigen::Index dim = h.rows();
  std::vector<DenseOp> q(static_cast<std::size_t>(spec.n_params()), DenseOp::Zero(dim, dim));
  DenseOp u = spec.u0_matrix();
  for (int m = 0; m < spec.n_members(); ++m) {
    const PauliString &b = spec.generators[static_cast<std::size_t>(m)];
    const int c = spec.column_of[static_cast<std::size_t>(m)];
    const DenseOp o = u * to_dense(b) * u.adjoint();
    q[static_cast<std::size_t>(c)] += cplx(0.0, 1.0) * (o * h - h * o);
    Circuit e(spec.n_qubits);
    e.add(Gate::pauli_rotation(b, row(c)));
    u = u * e.to_matrix();
  }
  return q;
}

/// ||V + sum_c beta_c i[O_c, H_mu]||^2 in the Hilbert-Schmidt norm.
inline double brute_cost(const HamiltonianPair &pair, const AnsatzSpec &spec, const Eigen::VectorXd &row,
                         const Eigen::VectorXd &beta, double mu) {
  if (beta.size() != spec.n_params()) throw Error(ErrorKind::SizeMismatch, "beta length");
  const auto q = dense_generator_commutators(pair, spec, row, mu);
  DenseOp g = to_dense(pair.v);
  for (std::size_t c = 0; c < q.size(); ++c) g += beta(static_cast<Eigen::Index>(c)) * q[c];
  return (g.adjoint() * g).trace().real();
}

}  // namespace vagt
