#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "vagt/dense.hpp"
#include "vagt/pauli.hpp"
#include "vagt/rng.hpp"
#include "vagt/simulator.hpp"

namespace vagt {

struct InvariantCheck {
  std::string name;
  int cases = 0;
  double max_error = 0.0;
  double tolerance = 0.0;

  bool passed() const { return max_error <= tolerance; }
};

namespace detail {

inline PauliString random_string(int n, Rng &rng, bool allow_identity = true) {
  const std::uint64_t d = std::uint64_t{1} << (2 * n);
  for (;;) {
    const std::uint64_t c = rng.next_u64() % d;
    if (allow_identity || c != 0) return PauliString(n, c);
  }
}

inline DenseOp random_hermitian(int n, Rng &rng) {
  const Eigen::Index d = Eigen::Index{1} << n;
  DenseOp a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      const double re = rng.normal();
      a(i, j) = cplx(re, rng.normal());
    }
  return 0.5 * (a + a.adjoint());
}

inline Circuit random_circuit(int n, Rng &rng, int depth) {
  Circuit c(n);
  for (int k = 0; k < depth; ++k) {
    const int q = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
    const double th = 2.0 * std::numbers::pi * rng.uniform();
    switch (rng.next_u64() % 6) {
      case 0: c.add(Gate::h(q)); break;
      case 1: c.add(Gate::rx(q, th)); break;
      case 2: c.add(Gate::ry(q, th)); break;
      case 3: c.add(Gate::rz(q, th)); break;
      case 4:
        if (n > 1) c.add(Gate::cnot(q, (q + 1) % n));
        break;
      default: c.add(Gate::pauli_rotation(random_string(n, rng, false), th)); break;
    }
  }
  return c;
}

/// 2^{-N/2} sum_i |i>|i> as a dense vector.
inline CVec phi_vector(int n) {
  const Eigen::Index d = Eigen::Index{1} << n;
  CVec v = CVec::Zero(d * d);
  for (Eigen::Index i = 0; i < d; ++i) v(i * d + i) = 1.0;
  return v / std::sqrt(static_cast<double>(d));
}

inline double phi_expectation(const DenseOp &a, const DenseOp &b, int n) {
  const CVec phi = phi_vector(n);
  return phi.dot(kron(a, b) * phi).real();
}

inline DenseOp i_commutator(const DenseOp &a, const DenseOp &b) { return cplx(0.0, 1.0) * (a * b - b * a); }

}  // namespace detail

/// Trace identity, transpose parity, structure table and the three ancilla
/// probability relations, each against dense matrices on random cases.
inline std::vector<InvariantCheck> run_invariant_suite(int cases, std::uint64_t seed) {
  using detail::i_commutator;
  std::vector<InvariantCheck> out;
  auto check = [&](const std::string &name, double tol, auto &&one_case) {
    InvariantCheck c{name, cases, 0.0, tol};
    for (int k = 0; k < cases; ++k) {
      Rng rng(derive_seed(seed, {out.size(), static_cast<std::uint64_t>(k)}));
      c.max_error = std::max(c.max_error, one_case(rng, 1 + k % 3));
    }
    out.push_back(c);
  };

  check("trace identity", 1e-10, [](Rng &rng, int n) {
    const DenseOp a = detail::random_hermitian(n, rng), b = detail::random_hermitian(n, rng);
    const double lhs = (a * b).trace().real();
    const double rhs = std::ldexp(detail::phi_expectation(a.transpose(), b, n), n);
    return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
  });

  check("transpose parity", 1e-10, [](Rng &rng, int n) {
    const PauliString p = detail::random_string(n, rng);
    const DenseOp m = to_dense(p);
    return (m.transpose() - static_cast<double>(transpose_parity(p)) * m).cwiseAbs().maxCoeff();
  });

  check("structure table", 1e-10, [](Rng &rng, int n) {
    const StructureTable table(n);
    double err = 0.0;
    for (int r = 0; r < 8; ++r) {
      const PauliString l = detail::random_string(n, rng), j = detail::random_string(n, rng);
      const DenseOp ml = to_dense(l), mj = to_dense(j);
      const DenseOp exact = ml.transpose() * mj - mj * ml.transpose();
      DenseOp got = DenseOp::Zero(exact.rows(), exact.cols());
      if (const auto &e = table.entry(l, j)) got = e->coefficient * to_dense(PauliString(n, e->h));
      err = std::max(err, (exact - got).cwiseAbs().maxCoeff());
    }
    return err;
  });

  check("b test p0 = 1/2 - v/4", 1e-10, [](Rng &rng, int n) {
    const Circuit u = detail::random_circuit(n, rng, 6 * n);
    const PauliString b = detail::random_string(n, rng, false), sj = detail::random_string(n, rng),
                      sk = detail::random_string(n, rng);
    const DenseOp um = u.to_matrix();
    const double v = detail::phi_expectation(to_dense(sj), i_commutator(um * to_dense(b) * um.adjoint(), to_dense(sk)), n);
    const HadamardOutcome o = hadamard_test_b(u, b, sj, sk);
    return std::max(std::abs(o.p0 - (0.5 - v / 4.0)), std::abs(o.value - (2.0 - 4.0 * o.p0)));
  });

  check("X test v = -4 + 8 p0", 1e-10, [](Rng &rng, int n) {
    const Circuit ue = detail::random_circuit(n, rng, 6 * n), ul = detail::random_circuit(n, rng, 6 * n);
    const PauliString be = detail::random_string(n, rng, false), bl = detail::random_string(n, rng, false),
                      sj = detail::random_string(n, rng), sk = detail::random_string(n, rng);
    const DenseOp v = ue.to_matrix().transpose(), ulm = ul.to_matrix();
    const double exact = detail::phi_expectation(i_commutator(v.adjoint() * to_dense(be) * v, to_dense(sj)),
                                                 i_commutator(ulm * to_dense(bl) * ulm.adjoint(), to_dense(sk)), n);
    const HadamardOutcome o = hadamard_test_x(ue, be, ul, bl, sj, sk);
    return std::max(std::abs(o.value - exact), std::abs(o.value - (-4.0 + 8.0 * o.p0)));
  });

  check("R_y test p0 = 1/2 + v/2", 1e-10, [](Rng &rng, int n) {
    const Circuit u = detail::random_circuit(n, rng, 6 * n);
    const PauliString b = detail::random_string(n, rng, false), sh = detail::random_string(n, rng);
    const DenseOp um = u.to_matrix();
    const double v = detail::phi_expectation(to_dense(sh), um * to_dense(b) * um.adjoint(), n);
    const HadamardOutcome o = ry_test(u, b, sh);
    return std::abs(o.p0 - (0.5 + v / 2.0));
  });
  return out;
}

}  // namespace vagt
