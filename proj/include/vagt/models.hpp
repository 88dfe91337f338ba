#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "vagt/dense.hpp"
#include "vagt/error.hpp"
#include "vagt/pauli.hpp"
#include "vagt/rng.hpp"
#include "vagt/simulator.hpp"

namespace vagt {

/// H_mu = H0 + mu V with the target coupling lambda.
struct HamiltonianPair {
  std::string name;
  int n_qubits = 1;
  PauliSum h0{1};
  PauliSum v{1};
  double lambda = 0.0;
  nlohmann::json params = nlohmann::json::object();
  /// Diagonalizing unitary of H0 when it is not the identity.
  std::optional<DenseOp> u0_dense;
  /// Same as a circuit; wins over u0_dense when both are set.
  std::optional<Circuit> u0_circuit;
  /// Symmetry label of every U0 column (magnetization for spin chains).
  std::vector<int> sector_labels;

  PauliSum h_mu(double mu) const { return h0 + v * cplx(mu, 0.0); }
  DenseOp dense(double mu) const { return to_dense(h_mu(mu)); }
  DenseOp dense() const { return dense(lambda); }
};

inline std::string pauli_on(int n, std::initializer_list<std::pair<int, char>> letters) {
  std::string s(static_cast<std::size_t>(n), 'I');
  for (const auto &[q, l] : letters) s[static_cast<std::size_t>(q)] = l;
  return s;
}

/// H0 = h Z_3, V = sum over pairs (1,3), (2,3) of XX + YY + ZZ, minus X_1 and X_2.
inline HamiltonianPair model_low_energy(double h, double lambda) {
  HamiltonianPair p;
  p.name = "low_energy";
  p.n_qubits = 3;
  p.lambda = lambda;
  p.params = {{"h", h}};
  p.h0 = PauliSum(3);
  p.h0.add(PauliString::from_letters("IIZ"), h);
  p.v = PauliSum(3);
  for (int a : {0, 1})
    for (char l : {'X', 'Y', 'Z'}) p.v.add(PauliString::from_letters(pauli_on(3, {{a, l}, {2, l}})), 1.0);
  p.v.add(PauliString::from_letters("XII"), -1.0);
  p.v.add(PauliString::from_letters("IXI"), -1.0);
  return p;
}

/// H0 eigenvectors found sector by sector in the Z-magnetization basis. The
/// sector's basis states, in index order, receive its eigenvectors in energy
/// order, so U0 commutes with sum Z and column i keeps the magnetization of
/// basis state i.
inline void attach_sector_eigenbasis(HamiltonianPair &p) {
  const int n = p.n_qubits;
  const Eigen::Index dim = Eigen::Index{1} << n;
  const DenseOp h0 = to_dense(p.h0);
  DenseOp u = DenseOp::Zero(dim, dim);
  for (int k = 0; k <= n; ++k) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < dim; ++i)
      if (std::popcount(static_cast<std::uint64_t>(i)) == k) idx.push_back(i);
    const auto d = static_cast<Eigen::Index>(idx.size());
    DenseOp block(d, d);
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b) block(a, b) = h0(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    const EigenSystem es = eig(block);
    for (Eigen::Index c = 0; c < d; ++c)
      for (Eigen::Index a = 0; a < d; ++a) u(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(c)]) = es.vectors(a, c);
  }
  p.sector_labels.clear();
  for (Eigen::Index i = 0; i < dim; ++i) p.sector_labels.push_back(n - 2 * std::popcount(static_cast<std::uint64_t>(i)));
  p.u0_dense = u;
}

/// H0 = sum_{i<N} (X_i X_{i+1} + Y_i Y_{i+1} + h Z_i), V = sum_i X_i.
inline HamiltonianPair model_spin_chain(int n, double h, double lambda) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "spin chain needs at least 2 qubits");
  if (n > 10) throw Error(ErrorKind::InvalidArgument, "spin chain limited to 10 qubits");
  HamiltonianPair p;
  p.name = "spin_chain";
  p.n_qubits = n;
  p.lambda = lambda;
  p.params = {{"n", n}, {"h", h}};
  p.h0 = PauliSum(n);
  p.v = PauliSum(n);
  for (int i = 0; i + 1 < n; ++i) {
    p.h0.add(PauliString::from_letters(pauli_on(n, {{i, 'X'}, {i + 1, 'X'}})), 1.0);
    p.h0.add(PauliString::from_letters(pauli_on(n, {{i, 'Y'}, {i + 1, 'Y'}})), 1.0);
    p.h0.add(PauliString::from_letters(pauli_on(n, {{i, 'Z'}})), h);
  }
  for (int i = 0; i < n; ++i) p.v.add(PauliString::from_letters(pauli_on(n, {{i, 'X'}})), 1.0);
  attach_sector_eigenbasis(p);
  return p;
}

/// For a diagonal H0: eigenvectors of V inside each degenerate H0 level,
/// identity elsewhere. Empty when no level is degenerate or V is already
/// diagonal on every level.
inline std::optional<DenseOp> degenerate_adapted_basis(const PauliSum &h0, const PauliSum &v, double tol = 1e-9) {
  const DenseOp hd = to_dense(h0), vd = to_dense(v);
  const Eigen::Index dim = hd.rows();
  DenseOp u = DenseOp::Identity(dim, dim);
  std::vector<bool> done(static_cast<std::size_t>(dim), false);
  bool changed = false;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (done[static_cast<std::size_t>(i)]) continue;
    std::vector<Eigen::Index> level;
    for (Eigen::Index j = i; j < dim; ++j)
      if (!done[static_cast<std::size_t>(j)] && std::abs(hd(j, j).real() - hd(i, i).real()) <= tol) {
        level.push_back(j);
        done[static_cast<std::size_t>(j)] = true;
      }
    if (level.size() < 2) continue;
    const auto d = static_cast<Eigen::Index>(level.size());
    DenseOp block(d, d);
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b) block(a, b) = vd(level[static_cast<std::size_t>(a)], level[static_cast<std::size_t>(b)]);
    if ((block - DenseOp(block.diagonal().asDiagonal())).cwiseAbs().maxCoeff() <= tol) continue;
    const EigenSystem es = eig(block);
    for (Eigen::Index c = 0; c < d; ++c)
      for (Eigen::Index a = 0; a < d; ++a)
        u(level[static_cast<std::size_t>(a)], level[static_cast<std::size_t>(c)]) = es.vectors(a, c);
    changed = true;
  }
  if (!changed) return std::nullopt;
  return u;
}

/// Stores an adapted basis from degenerate_adapted_basis, as a single gate
/// when the register is small enough.
inline void attach_adapted_basis(HamiltonianPair &p) {
  const auto u = degenerate_adapted_basis(p.h0, p.v);
  if (!u) return;
  if (p.n_qubits <= 3) {
    std::vector<int> all(static_cast<std::size_t>(p.n_qubits));
    for (int q = 0; q < p.n_qubits; ++q) all[static_cast<std::size_t>(q)] = q;
    Circuit c(p.n_qubits);
    c.add(Gate::unitary(*u, all));
    p.u0_circuit = c;
  } else {
    p.u0_dense = *u;
  }
}

inline const std::vector<std::string> &random_2q_strings() {
  static const std::vector<std::string> s = {"XI", "IX", "YI", "IY", "XX", "XY", "YX", "YY"};
  return s;
}

/// H0 = Z_1 + Z_2, V = sum_k v_k {XI, IX, YI, IY, XX, XY, YX, YY}_k with v_k
/// uniform in [0, 1).
inline HamiltonianPair model_random_2q(std::uint64_t seed, double lambda) {
  HamiltonianPair p;
  p.name = "random_2q";
  p.n_qubits = 2;
  p.lambda = lambda;
  p.h0 = PauliSum::from_terms({{"ZI", 1.0}, {"IZ", 1.0}});
  p.v = PauliSum(2);
  Rng rng(seed);
  std::vector<double> coeffs;
  for (const std::string &s : random_2q_strings()) {
    const double c = rng.uniform();
    coeffs.push_back(c);
    p.v.add(PauliString::from_letters(s), c);
  }
  p.params = {{"seed", seed}, {"v", coeffs}};
  attach_adapted_basis(p);
  return p;
}

/// H0 and V as Pauli text. A non-diagonal H0 gets its eigenvector matrix
/// as U0; a diagonal one gets the adapted basis of its degenerate levels.
inline HamiltonianPair model_custom(const std::string &h0, const std::string &v, double lambda) {
  HamiltonianPair p;
  p.name = "custom";
  p.h0 = PauliSum::parse(h0);
  p.n_qubits = p.h0.n_qubits();
  p.v = PauliSum::parse(v, p.n_qubits);
  p.lambda = lambda;
  p.params = {{"h0", h0}, {"v", v}};
  if (!p.h0.is_hermitian() || !p.v.is_hermitian())
    throw Error(ErrorKind::NonHermitian, "custom model terms must have real coefficients");
  for (const auto &[code, c] : p.h0.terms())
    if (!PauliString(p.n_qubits, code).is_diagonal()) {
      p.u0_dense = eig(to_dense(p.h0)).vectors;
      return p;
    }
  attach_adapted_basis(p);
  return p;
}

}  // namespace vagt
