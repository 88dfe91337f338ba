#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vagt/ansatz.hpp"
#include "vagt/dense.hpp"
#include "vagt/error.hpp"
#include "vagt/models.hpp"
#include "vagt/parallel.hpp"
#include "vagt/pauli.hpp"
#include "vagt/rng.hpp"
#include "vagt/simulator.hpp"

namespace vagt {

enum class StrategyMode { Analytic, CircuitExact, CircuitShots, CheapN2 };

inline const char *to_string(StrategyMode m) {
  switch (m) {
    case StrategyMode::Analytic: return "analytic";
    case StrategyMode::CircuitExact: return "circuit-exact";
    case StrategyMode::CircuitShots: return "circuit-shots";
    case StrategyMode::CheapN2: return "cheap-n2";
  }
  return "?";
}

inline StrategyMode parse_strategy_mode(const std::string &s) {
  for (StrategyMode m : {StrategyMode::Analytic, StrategyMode::CircuitExact, StrategyMode::CircuitShots, StrategyMode::CheapN2})
    if (s == to_string(m)) return m;
  throw Error(ErrorKind::UnknownName, "unknown strategy '" + s + "'");
}

/// `shots == 0` means exact probabilities (only meaningful for cheap-n2,
/// which accepts both).
struct EstimatorStrategy {
  StrategyMode mode = StrategyMode::Analytic;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  /// V in the X test is the reversed ansatz rather than its transpose.
  bool symmetric_shortcut = false;
  /// cheap-n2 base values from a direct expectation instead of the R_y test.
  bool direct_measurement = false;
  /// Relative eigenvalue cutoff of the pseudo-inverse in the linear solve.
  double cutoff = 1e-10;

  bool sampled() const {
    return mode == StrategyMode::CircuitShots || (mode == StrategyMode::CheapN2 && shots > 0);
  }
};

struct CircuitCount {
  std::uint64_t n_b = 0;
  std::uint64_t n_x = 0;
  std::uint64_t n_base = 0;
};

struct SolveResult {
  Eigen::VectorXd beta;
  double residual = 0.0;
  int rank = 0;
  int negative_eigenvalues = 0;
  bool psd_warning = false;
};

struct StepSystem {
  int t = 0;
  double mu = 0.0;
  Eigen::MatrixXd X;
  Eigen::VectorXd b;
  Eigen::VectorXd beta;
  double residual = 0.0;
  /// ||V||^2 and the quadratic cost at beta.
  double cost_zero = 0.0;
  double cost_solved = 0.0;
  CircuitCount circuits;
  int rank = 0;
  int negative_eigenvalues = 0;
  bool psd_warning = false;
  double shot_se = 0.0;
};

inline constexpr double kSolveCutoff = 1e-10;

/// Minimum-norm solution of X beta = b through the eigendecomposition of the
/// symmetrized X. Eigenvalues at or below cutoff * max|lambda| (negative ones
/// included) are dropped; a negative eigenvalue below -10 shot_se raises the
/// warning flag.
inline SolveResult solve_step(const Eigen::MatrixXd &X, const Eigen::VectorXd &b, double shot_se = 0.0,
                              double cutoff = kSolveCutoff) {
  if (X.rows() != X.cols() || X.rows() != b.size()) throw Error(ErrorKind::SizeMismatch, "solve_step dimensions");
  if (!X.allFinite() || !b.allFinite()) throw Error(ErrorKind::NumericalBreakdown, "non-finite step system");
  SolveResult out;
  out.beta = Eigen::VectorXd::Zero(b.size());
  if (b.size() == 0) return out;
  const Eigen::MatrixXd sym = 0.5 * (X + X.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NumericalBreakdown, "eigensolver failed on X");
  const Eigen::VectorXd &w = es.eigenvalues();
  const double scale = w.cwiseAbs().maxCoeff();
  const double keep = cutoff * scale;
  const double warn = -std::max(10.0 * shot_se, keep);
  const Eigen::VectorXd proj = es.eigenvectors().transpose() * b;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) < 0.0 && std::abs(w(i)) > keep) ++out.negative_eigenvalues;
    if (w(i) < warn) out.psd_warning = true;
    if (scale > 0.0 && w(i) > keep) {
      out.beta += es.eigenvectors().col(i) * (proj(i) / w(i));
      ++out.rank;
    }
  }
  out.residual = (X * out.beta - b).norm();
  if (!out.beta.allFinite()) throw Error(ErrorKind::NumericalBreakdown, "non-finite step solution");
  return out;
}

/// Closed-form circuit counts per step: n_b = |V| |H| L and
/// n_X = |H|^2 L (L+1) / 2, identity terms excluded from |V| and |H|.
inline std::pair<std::uint64_t, std::uint64_t> circuit_budget(int n_qubits, std::uint64_t gamma_v, std::uint64_t gamma_h,
                                                              std::uint64_t layers) {
  (void)n_qubits;
  return {gamma_v * gamma_h * layers, gamma_h * gamma_h * layers * (layers + 1) / 2};
}

namespace detail {

/// i^{e-1} for the anticommuting exponents e in {1, 3}.
inline double anticommute_sign(std::uint64_t b, std::uint64_t c) {
  return product_phase_exponent(b, c) == 1 ? 1.0 : -1.0;
}

}  // namespace detail

/// Real Pauli-coefficient vectors of length 4^N for Hermitian operators.
/// Conjugation by exp(-i theta B) and the commutator i[B, .] act on them
/// string by string without forming matrices.
namespace pauli_vec {

inline Eigen::VectorXd from_sum(const PauliSum &s) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(Eigen::Index{1} << (2 * s.n_qubits()));
  for (const auto &[code, c] : s.terms()) v(static_cast<Eigen::Index>(code)) = c.real();
  return v;
}

inline PauliSum to_sum(const Eigen::VectorXd &v, int n) {
  PauliSum s(n);
  for (Eigen::Index c = 0; c < v.size(); ++c)
    if (v(c) != 0.0) s.add(PauliString(n, static_cast<std::uint64_t>(c)), v(c));
  return s;
}

/// exp(-i theta B) O exp(i theta B).
inline void conjugate(Eigen::VectorXd &v, std::uint64_t b, double theta) {
  const double c2 = std::cos(2 * theta), s2 = std::sin(2 * theta);
  const Eigen::VectorXd in = v;
  for (Eigen::Index c = 0; c < in.size(); ++c) {
    const double x = in(c);
    if (x == 0.0) continue;
    const std::uint64_t code = static_cast<std::uint64_t>(c);
    if (detail::codes_commute(b, code)) continue;
    v(c) += (c2 - 1.0) * x;
    v(static_cast<Eigen::Index>(b ^ code)) += detail::anticommute_sign(b, code) * s2 * x;
  }
}

/// i[B, O].
inline Eigen::VectorXd commutator(std::uint64_t b, const Eigen::VectorXd &v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (Eigen::Index c = 0; c < v.size(); ++c) {
    const double x = v(c);
    if (x == 0.0) continue;
    const std::uint64_t code = static_cast<std::uint64_t>(c);
    if (detail::codes_commute(b, code)) continue;
    out(static_cast<Eigen::Index>(b ^ code)) += -2.0 * detail::anticommute_sign(b, code) * x;
  }
  return out;
}

}  // namespace pauli_vec

/// Analytic step engine. Works in the frame of U0: H0 and V are rotated once,
/// then each Q_m = i[O_m, H] is obtained as e_1..e_{m-1} i[B_m, H_m]
/// e_{m-1}^dag..e_1^dag with H_m the Hamiltonian conjugated through the
/// earlier factors.
class AnalyticEngine {
 public:
  AnalyticEngine(const HamiltonianPair &pair, const AnsatzSpec &spec) : n_(spec.n_qubits), spec_(spec) {
    if (pair.n_qubits != spec.n_qubits) throw Error(ErrorKind::SizeMismatch, "model and ansatz sizes differ");
    if (n_ > 6) throw Error(ErrorKind::InvalidArgument, "analytic estimator supports up to 6 qubits");
    bool identity_u0 = spec.has_circuit_u0() && spec.u0.empty();
    if (identity_u0) {
      h0_ = pauli_vec::from_sum(pair.h0);
      v_ = pauli_vec::from_sum(pair.v);
    } else {
      const DenseOp u0 = spec.u0_matrix();
      h0_ = pauli_vec::from_sum(decompose(hermitize(u0.adjoint() * to_dense(pair.h0) * u0)));
      v_ = pauli_vec::from_sum(decompose(hermitize(u0.adjoint() * to_dense(pair.v) * u0)));
    }
  }

  int n_qubits() const { return n_; }
  /// V in the U0 frame.
  const Eigen::VectorXd &v() const { return v_; }

  /// Columns Q_c = sum over members of column c, in the U0 frame.
  Eigen::MatrixXd q_columns(const Eigen::VectorXd &row, double mu) const {
    detail::check_row(spec_, row);
    const int m_count = spec_.n_members();
    Eigen::VectorXd h = h0_ + mu * v_;
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(h.size(), spec_.n_params());
    std::vector<Eigen::VectorXd> members(static_cast<std::size_t>(m_count));
    for (int m = 0; m < m_count; ++m) {
      const std::uint64_t b = spec_.generators[static_cast<std::size_t>(m)].code();
      members[static_cast<std::size_t>(m)] = pauli_vec::commutator(b, h);
      pauli_vec::conjugate(h, b, -detail::member_angle(spec_, row, m));
    }
    parallel_for(static_cast<std::size_t>(m_count), [&](std::size_t m) {
      Eigen::VectorXd &x = members[m];
      for (int k = static_cast<int>(m) - 1; k >= 0; --k)
        pauli_vec::conjugate(x, spec_.generators[static_cast<std::size_t>(k)].code(), detail::member_angle(spec_, row, k));
    });
    for (int m = 0; m < m_count; ++m) q.col(spec_.column_of[static_cast<std::size_t>(m)]) += members[static_cast<std::size_t>(m)];
    return q;
  }

  double dim() const { return std::ldexp(1.0, n_); }

 private:
  static DenseOp hermitize(const DenseOp &m) { return 0.5 * (m + m.adjoint()); }

  int n_;
  AnsatzSpec spec_;
  Eigen::VectorXd h0_, v_;
};

namespace detail {

struct RealTerm {
  PauliString p;
  double c;
};

inline std::vector<RealTerm> nonidentity_terms(const PauliSum &s) {
  std::vector<RealTerm> out;
  for (const auto &[p, c] : s.real_terms(true)) out.push_back({p, c});
  return out;
}

enum : std::uint64_t { kSeedB = 1, kSeedX = 2, kSeedBase = 3, kSeedHeff = 4 };

}  // namespace detail

/// Circuit-mode b and X from Hadamard tests, one evaluation per
/// (member, V term, H term) and per (member pair, H term, H term).
class CircuitEngine {
 public:
  CircuitEngine(const HamiltonianPair &pair, const AnsatzSpec &spec, EstimatorStrategy strategy)
      : pair_(pair), spec_(spec), strategy_(strategy) {
    if (!spec.has_circuit_u0())
      throw Error(ErrorKind::NonCircuitU0, "circuit strategies need U0 as a circuit");
    if (pair.n_qubits != spec.n_qubits) throw Error(ErrorKind::SizeMismatch, "model and ansatz sizes differ");
    v_terms_ = detail::nonidentity_terms(pair.v);
  }

  std::optional<ShotSampler> sampler(int t, std::uint64_t kind, std::initializer_list<std::uint64_t> idx) const {
    if (strategy_.mode != StrategyMode::CircuitShots) return std::nullopt;
    std::vector<std::uint64_t> path = {static_cast<std::uint64_t>(t), kind};
    path.insert(path.end(), idx.begin(), idx.end());
    std::uint64_t s = derive_seed(strategy_.seed, {});
    for (std::uint64_t p : path) s = derive_seed(s, {p});
    return ShotSampler{s, strategy_.shots};
  }

  Eigen::VectorXd build_b(const Eigen::VectorXd &row, int t, double mu, CircuitCount *count = nullptr) const {
    const auto h_terms = detail::nonidentity_terms(pair_.h_mu(mu));
    const int m_count = spec_.n_members();
    const double dim = std::ldexp(1.0, spec_.n_qubits);
    std::vector<Circuit> us = unitaries(row);
    const std::size_t nv = v_terms_.size(), nh = h_terms.size();
    std::vector<double> member_b(static_cast<std::size_t>(m_count), 0.0);
    parallel_for(static_cast<std::size_t>(m_count), [&](std::size_t m) {
      double acc = 0.0;
      for (std::size_t j = 0; j < nv; ++j)
        for (std::size_t k = 0; k < nh; ++k) {
          const auto &vj = v_terms_[j];
          const auto &hk = h_terms[k];
          const double val = hadamard_test_b(us[m], spec_.generators[m], vj.p, hk.p,
                                             sampler(t, detail::kSeedB, {m, j, k}))
                                 .value;
          acc += -vj.c * hk.c * dim * transpose_parity(vj.p) * val;
        }
      member_b[m] = acc;
    });
    Eigen::VectorXd b = Eigen::VectorXd::Zero(spec_.n_params());
    for (int m = 0; m < m_count; ++m) b(spec_.column_of[static_cast<std::size_t>(m)]) += member_b[static_cast<std::size_t>(m)];
    if (count) count->n_b += static_cast<std::uint64_t>(m_count) * nv * nh;
    return b;
  }

  Eigen::MatrixXd build_X(const Eigen::VectorXd &row, int t, double mu, CircuitCount *count = nullptr) const {
    const auto h_terms = detail::nonidentity_terms(pair_.h_mu(mu));
    const int m_count = spec_.n_members();
    const double dim = std::ldexp(1.0, spec_.n_qubits);
    std::vector<Circuit> us = unitaries(row);
    const std::size_t nh = h_terms.size();
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < m_count; ++a)
      for (int b = a; b < m_count; ++b) pairs.emplace_back(a, b);
    std::vector<double> gram(pairs.size(), 0.0);
    TestXOptions opts{strategy_.symmetric_shortcut};
    parallel_for(pairs.size(), [&](std::size_t p) {
      const auto [a, b] = pairs[p];
      const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
      const PauliString &ba = spec_.generators[ua];
      const double sb = transpose_parity(ba);
      double acc = 0.0;
      for (std::size_t j = 0; j < nh; ++j)
        for (std::size_t k = 0; k < nh; ++k) {
          const auto &hj = h_terms[j];
          const auto &hk = h_terms[k];
          const double val =
              hadamard_test_x(us[ua], ba, us[ub], spec_.generators[ub], hj.p, hk.p,
                              sampler(t, detail::kSeedX, {ua, ub, j, k}), opts)
                  .value;
          acc += hj.c * hk.c * dim * (-static_cast<double>(transpose_parity(hj.p))) * sb * val;
        }
      gram[p] = acc;
    });
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(spec_.n_params(), spec_.n_params());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto [a, b] = pairs[p];
      const int ca = spec_.column_of[static_cast<std::size_t>(a)], cb = spec_.column_of[static_cast<std::size_t>(b)];
      x(ca, cb) += gram[p];
      if (a != b) x(cb, ca) += gram[p];
    }
    if (count) count->n_x += nh * nh * pairs.size();
    return x;
  }

  /// Rough standard error of an X entry from binomial noise, used for the
  /// positive-semidefiniteness warning.
  double shot_standard_error(double mu) const {
    if (strategy_.mode != StrategyMode::CircuitShots) return 0.0;
    double h2 = 0.0;
    for (const auto &t : detail::nonidentity_terms(pair_.h_mu(mu))) h2 += t.c * t.c;
    return std::ldexp(1.0, spec_.n_qubits) * 4.0 / std::sqrt(static_cast<double>(strategy_.shots)) * h2;
  }

 private:
  std::vector<Circuit> unitaries(const Eigen::VectorXd &row) const {
    std::vector<Circuit> us;
    for (int m = 1; m <= spec_.n_members(); ++m) us.push_back(partial_unitary(spec_, row, m));
    return us;
  }

  HamiltonianPair pair_;
  AnsatzSpec spec_;
  EstimatorStrategy strategy_;
  std::vector<detail::RealTerm> v_terms_;
};

/// Circuits one step would run in circuit mode at this mu.
inline CircuitCount step_budget(const HamiltonianPair &pair, const AnsatzSpec &spec, double mu) {
  const auto [nb, nx] = circuit_budget(spec.n_qubits, detail::nonidentity_terms(pair.v).size(),
                                       detail::nonidentity_terms(pair.h_mu(mu)).size(),
                                       static_cast<std::uint64_t>(spec.n_members()));
  return {nb, nx, 0};
}

inline void fill_costs(StepSystem &s, double v_norm2) {
  s.cost_zero = v_norm2;
  s.cost_solved = v_norm2 - 2.0 * s.b.dot(s.beta) + s.beta.dot(s.X * s.beta);
}

inline Eigen::VectorXd build_b(const HamiltonianPair &pair, const AnsatzSpec &spec, const Eigen::VectorXd &row, int t,
                               double mu, const EstimatorStrategy &strategy, CircuitCount *count = nullptr) {
  switch (strategy.mode) {
    case StrategyMode::Analytic: {
      const AnalyticEngine e(pair, spec);
      return -e.dim() * e.q_columns(row, mu).transpose() * e.v();
    }
    case StrategyMode::CircuitExact:
    case StrategyMode::CircuitShots: return CircuitEngine(pair, spec, strategy).build_b(row, t, mu, count);
    case StrategyMode::CheapN2: break;
  }
  throw Error(ErrorKind::InvalidArgument, "cheap-n2 systems are built by the cheap_n2 module");
}

inline Eigen::MatrixXd build_X(const HamiltonianPair &pair, const AnsatzSpec &spec, const Eigen::VectorXd &row, int t,
                               double mu, const EstimatorStrategy &strategy, CircuitCount *count = nullptr) {
  switch (strategy.mode) {
    case StrategyMode::Analytic: {
      const AnalyticEngine e(pair, spec);
      const Eigen::MatrixXd q = e.q_columns(row, mu);
      return e.dim() * q.transpose() * q;
    }
    case StrategyMode::CircuitExact:
    case StrategyMode::CircuitShots: return CircuitEngine(pair, spec, strategy).build_X(row, t, mu, count);
    case StrategyMode::CheapN2: break;
  }
  throw Error(ErrorKind::InvalidArgument, "cheap-n2 systems are built by the cheap_n2 module");
}

}  // namespace vagt
