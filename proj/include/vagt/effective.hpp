#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <vector>

#include "vagt/dense.hpp"
#include "vagt/error.hpp"
#include "vagt/estimator.hpp"
#include "vagt/parallel.hpp"
#include "vagt/pauli.hpp"
#include "vagt/rng.hpp"
#include "vagt/simulator.hpp"
#include "vagt/vagt.hpp"

namespace vagt {

/// P = 1 on the effective qubits times |pi><pi| on the rest.
class LowEnergyProjector {
 public:
  LowEnergyProjector(int n_qubits, std::vector<int> effective, std::vector<int> pinned_bits)
      : n_(n_qubits), effective_(std::move(effective)), bits_(std::move(pinned_bits)) {
    if (n_ < 1 || n_ > kMaxPauliQubits) throw Error(ErrorKind::InvalidArgument, "projector qubit count");
    std::sort(effective_.begin(), effective_.end());
    if (std::adjacent_find(effective_.begin(), effective_.end()) != effective_.end())
      throw Error(ErrorKind::InvalidArgument, "repeated effective qubit");
    for (int q : effective_)
      if (q < 0 || q >= n_) throw Error(ErrorKind::IndexOutOfRange, "effective qubit " + std::to_string(q));
    for (int q = 0; q < n_; ++q)
      if (!std::binary_search(effective_.begin(), effective_.end(), q)) pinned_.push_back(q);
    if (bits_.size() != pinned_.size()) throw Error(ErrorKind::SizeMismatch, "one pinned bit per remaining qubit");
    for (int b : bits_)
      if (b != 0 && b != 1) throw Error(ErrorKind::InvalidArgument, "pinned bits are 0 or 1");
  }

  int n_qubits() const { return n_; }
  int n_effective() const { return static_cast<int>(effective_.size()); }
  const std::vector<int> &effective() const { return effective_; }
  const std::vector<int> &pinned() const { return pinned_; }
  const std::vector<int> &pinned_bits() const { return bits_; }

  /// Full basis index of effective index a (effective_[0] most significant).
  std::uint64_t embed(std::uint64_t a) const {
    std::uint64_t idx = 0;
    const int ne = n_effective();
    for (int k = 0; k < ne; ++k)
      if (a >> (ne - 1 - k) & 1) idx |= std::uint64_t{1} << (n_ - 1 - effective_[static_cast<std::size_t>(k)]);
    for (std::size_t k = 0; k < pinned_.size(); ++k)
      if (bits_[k]) idx |= std::uint64_t{1} << (n_ - 1 - pinned_[k]);
    return idx;
  }

  CVec embed_state(const CVec &xi) const {
    if (xi.size() != (Eigen::Index{1} << n_effective())) throw Error(ErrorKind::SizeMismatch, "effective state size");
    CVec out = CVec::Zero(Eigen::Index{1} << n_);
    for (Eigen::Index a = 0; a < xi.size(); ++a) out(static_cast<Eigen::Index>(embed(static_cast<std::uint64_t>(a)))) = xi(a);
    return out;
  }

  DenseOp dense() const {
    const Eigen::Index dim = Eigen::Index{1} << n_;
    DenseOp p = DenseOp::Zero(dim, dim);
    for (std::uint64_t a = 0; a < (std::uint64_t{1} << n_effective()); ++a) {
      const auto i = static_cast<Eigen::Index>(embed(a));
      p(i, i) = 1.0;
    }
    return p;
  }

  /// The P block of h as a 2^N_eff square matrix.
  DenseOp restrict(const DenseOp &h) const {
    const Eigen::Index d = Eigen::Index{1} << n_effective();
    if (h.rows() != (Eigen::Index{1} << n_)) throw Error(ErrorKind::SizeMismatch, "operator size for projector");
    DenseOp b(d, d);
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index c = 0; c < d; ++c)
        b(a, c) = h(static_cast<Eigen::Index>(embed(static_cast<std::uint64_t>(a))),
                    static_cast<Eigen::Index>(embed(static_cast<std::uint64_t>(c))));
    return b;
  }

  /// Letters of a full-register string on the effective qubits.
  PauliString to_effective(const PauliString &s) const {
    if (s.n_qubits() != n_) throw Error(ErrorKind::SizeMismatch, "operator size for projector");
    std::uint64_t code = 0;
    for (int q = 0; q < n_; ++q) {
      const bool eff = std::binary_search(effective_.begin(), effective_.end(), q);
      if (!eff && s.letter(q) != Letter::I)
        throw Error(ErrorKind::BadEffectiveOperator, s.str() + " acts outside the effective qubits");
      if (eff) code = (code << 2) | static_cast<std::uint64_t>(s.letter(q));
    }
    return PauliString(n_effective(), code);
  }

 private:
  int n_;
  std::vector<int> effective_;
  std::vector<int> pinned_;
  std::vector<int> bits_;
};

struct EffectiveHamiltonian {
  std::vector<int> effective;
  PauliSum terms{1};

  int n_effective() const { return terms.n_qubits(); }
  DenseOp dense() const { return to_dense(terms); }
};

namespace detail {

inline std::vector<PauliString> all_strings(int n) {
  std::vector<PauliString> out;
  for (std::uint64_t c = 0; c < (std::uint64_t{1} << (2 * n)); ++c) out.emplace_back(n, c);
  return out;
}

inline EffectiveHamiltonian make_heff(const LowEnergyProjector &p, const std::vector<PauliString> &sigmas,
                                      const std::vector<double> &coeffs) {
  EffectiveHamiltonian out;
  out.effective = p.effective();
  out.terms = PauliSum(p.n_effective());
  for (std::size_t i = 0; i < sigmas.size(); ++i) out.terms.add(sigmas[i], coeffs[i]);
  return out;
}

}  // namespace detail

/// h_j = Tr(H~ P s_j P) / 2^N_eff from the dense rotated Hamiltonian.
inline EffectiveHamiltonian heff_from_dense(const DenseOp &htilde, const LowEnergyProjector &p,
                                            const std::vector<PauliString> &sigmas) {
  const DenseOp block = p.restrict(htilde);
  const double d = static_cast<double>(block.rows());
  std::vector<double> coeffs;
  for (const PauliString &s : sigmas) {
    if (s.n_qubits() != p.n_effective()) throw Error(ErrorKind::BadEffectiveOperator, "effective operator size");
    coeffs.push_back((to_dense(s) * block).trace().real() / d);
  }
  return detail::make_heff(p, sigmas, coeffs);
}

/// The same coefficients as sum_j h_j <pi phi| U^dag s_j U (x) s~* |pi phi>,
/// with the effective qubits entangled with an N_eff-qubit reference
/// register. Each string is measured by rotating X to Z (H) and Y to Z
/// (Rx(pi/2)) and reading the parity.
inline EffectiveHamiltonian heff_from_circuit(const PauliSum &h, const Circuit &u, const LowEnergyProjector &p,
                                              const std::vector<PauliString> &sigmas, const EstimatorStrategy &strategy) {
  const int n = p.n_qubits(), ne = p.n_effective();
  if (u.n_qubits() != n || h.n_qubits() != n) throw Error(ErrorKind::SizeMismatch, "circuit size for projector");
  if (strategy.mode == StrategyMode::CheapN2)
    throw Error(ErrorKind::InvalidArgument, "cheap-n2 does not apply to effective Hamiltonians");
  Circuit prep(n + ne);
  for (std::size_t k = 0; k < p.pinned().size(); ++k)
    if (p.pinned_bits()[k]) prep.add(Gate::pauli_string(PauliString::from_letters("X"), {p.pinned()[k]}));
  for (int k = 0; k < ne; ++k) {
    const int e = p.effective()[static_cast<std::size_t>(k)];
    prep.add(Gate::h(e));
    prep.add(Gate::cnot(e, n + k));
  }
  prep.append(u);
  StateVector state(n + ne);
  state.apply(prep);

  std::vector<std::pair<PauliString, double>> terms;
  for (const auto &[s, c] : h.real_terms(false)) terms.emplace_back(s, c);
  std::vector<double> coeffs(sigmas.size(), 0.0);
  parallel_for(sigmas.size(), [&](std::size_t i) {
    const PauliString &sig = sigmas[i];
    if (sig.n_qubits() != ne) throw Error(ErrorKind::BadEffectiveOperator, "effective operator size");
    const double conj_sign = transpose_parity(sig);
    double acc = 0.0;
    for (std::size_t j = 0; j < terms.size(); ++j) {
      const std::uint64_t code = (terms[j].first.code() << (2 * ne)) | sig.code();
      const PauliString full(n + ne, code);
      double value = 1.0;
      if (!full.is_identity()) {
        StateVector s = state;
        std::vector<int> measured;
        for (int q = 0; q < n + ne; ++q) {
          const Letter l = full.letter(q);
          if (l == Letter::I) continue;
          if (l == Letter::X) s.apply(Gate::h(q));
          if (l == Letter::Y) s.apply(Gate::rx(q, std::numbers::pi / 2));
          measured.push_back(q);
        }
        const std::vector<double> probs = s.probabilities(measured);
        value = 0.0;
        if (strategy.mode == StrategyMode::CircuitShots) {
          const ShotSampler sampler{derive_seed(strategy.seed, {detail::kSeedHeff, i, j}), strategy.shots};
          const auto counts = draw_counts(probs, sampler);
          for (std::size_t x = 0; x < counts.size(); ++x)
            value += (std::popcount(x) % 2 ? -1.0 : 1.0) * static_cast<double>(counts[x]);
          value /= static_cast<double>(strategy.shots);
        } else {
          for (std::size_t x = 0; x < probs.size(); ++x) value += (std::popcount(x) % 2 ? -1.0 : 1.0) * probs[x];
        }
      }
      acc += terms[j].second * conj_sign * value;
    }
    coeffs[i] = acc;
  });
  return detail::make_heff(p, sigmas, coeffs);
}

/// Reference H_eff from the exact spectrum: the lowest 2^N_eff eigenvectors
/// of H_lambda, projected onto P and made orthonormal by the polar
/// decomposition (the direct rotation), carry the exact low eigenvalues.
inline EffectiveHamiltonian direct_rotation_heff(const HamiltonianPair &pair, const LowEnergyProjector &p) {
  if (p.n_qubits() != pair.n_qubits) throw Error(ErrorKind::SizeMismatch, "projector size differs from model");
  const EigenSystem full = eig(pair.dense(pair.lambda));
  const Eigen::Index d = Eigen::Index{1} << p.n_effective();
  DenseOp w(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index k = 0; k < d; ++k) w(a, k) = full.vectors(static_cast<Eigen::Index>(p.embed(static_cast<std::uint64_t>(a))), k);
  Eigen::JacobiSVD<DenseOp> svd(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues().minCoeff() < 1e-8)
    throw Error(ErrorKind::NumericalBreakdown, "low eigenvectors miss the projected subspace");
  const DenseOp q = svd.matrixU() * svd.matrixV().adjoint();
  const DenseOp h = q * full.values.head(d).cast<cplx>().asDiagonal() * q.adjoint();
  const std::vector<PauliString> sigmas = detail::all_strings(p.n_effective());
  std::vector<double> coeffs;
  for (const PauliString &s : sigmas) coeffs.push_back((to_dense(s) * h).trace().real() / static_cast<double>(d));
  return detail::make_heff(p, sigmas, coeffs);
}

/// Coefficients of the given full-register strings, which must act only on
/// the effective qubits.
inline EffectiveHamiltonian extract_heff(const VagtResult &result, const LowEnergyProjector &p,
                                         const std::vector<PauliString> &full_strings,
                                         const EstimatorStrategy &strategy = {}) {
  if (p.n_qubits() != result.pair.n_qubits) throw Error(ErrorKind::SizeMismatch, "projector size differs from model");
  std::vector<PauliString> sigmas;
  for (const PauliString &s : full_strings) sigmas.push_back(p.to_effective(s));
  if (strategy.mode == StrategyMode::Analytic) return heff_from_dense(result.htilde_dense, p, sigmas);
  if (!result.circuit) throw Error(ErrorKind::NonCircuitU0, "circuit extraction needs U as a circuit");
  return heff_from_circuit(result.pair.h_mu(result.pair.lambda), *result.circuit, p, sigmas, strategy);
}

/// All 4^N_eff coefficients.
inline EffectiveHamiltonian extract_heff(const VagtResult &result, const LowEnergyProjector &p,
                                         const EstimatorStrategy &strategy = {}) {
  if (p.n_qubits() != result.pair.n_qubits) throw Error(ErrorKind::SizeMismatch, "projector size differs from model");
  const std::vector<PauliString> sigmas = detail::all_strings(p.n_effective());
  if (strategy.mode == StrategyMode::Analytic) return heff_from_dense(result.htilde_dense, p, sigmas);
  if (!result.circuit) throw Error(ErrorKind::NonCircuitU0, "circuit extraction needs U as a circuit");
  return heff_from_circuit(result.pair.h_mu(result.pair.lambda), *result.circuit, p, sigmas, strategy);
}

/// Mean and normal 95% interval over rows, per column.
struct SeriesStats {
  Eigen::VectorXd mean, lo, hi;
};

inline SeriesStats column_stats(const Eigen::MatrixXd &samples) {
  const Eigen::Index n = samples.rows();
  SeriesStats s;
  s.mean = samples.colwise().mean().transpose();
  s.lo = s.hi = s.mean;
  if (n < 2) return s;
  for (Eigen::Index c = 0; c < samples.cols(); ++c) {
    const double var = (samples.col(c).array() - s.mean(c)).square().sum() / static_cast<double>(n - 1);
    const double half = 1.96 * std::sqrt(var / static_cast<double>(n));
    s.lo(c) = s.mean(c) - half;
    s.hi(c) = s.mean(c) + half;
  }
  return s;
}

/// F1(t) = <psi_eff(t)| rho(t) |psi_eff(t)>, F2(t) = <xi| rho(t) |xi>, one row
/// per initial state.
struct FidelitySeries {
  std::vector<double> times;
  Eigen::MatrixXd f1, f2;
  SeriesStats f1_stats, f2_stats;
};

/// Haar-random effective states from seeded complex Gaussians.
inline std::vector<CVec> random_states(int n_qubits, int count, std::uint64_t seed) {
  std::vector<CVec> out;
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    CVec v(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      const double re = rng.normal();
      v(k) = cplx(re, rng.normal());
    }
    out.push_back(v / v.norm());
  }
  return out;
}

inline std::vector<double> log_times(double first, double last, int points) {
  std::vector<double> t;
  for (int i = 0; i < points; ++i)
    t.push_back(points == 1 ? first : first * std::pow(last / first, static_cast<double>(i) / (points - 1)));
  return t;
}

inline std::vector<double> linear_times(double first, double last, int points) {
  std::vector<double> t;
  for (int i = 0; i < points; ++i) t.push_back(points == 1 ? first : first + (last - first) * i / (points - 1));
  return t;
}

inline FidelitySeries fidelities(const HamiltonianPair &pair, const EffectiveHamiltonian &heff,
                                 const LowEnergyProjector &p, const std::vector<CVec> &states,
                                 const std::vector<double> &times) {
  if (heff.n_effective() != p.n_effective()) throw Error(ErrorKind::SizeMismatch, "effective Hamiltonian size");
  const EigenSystem full = eig(pair.dense(pair.lambda));
  const EigenSystem eff = eig(heff.dense());
  FidelitySeries out;
  out.times = times;
  const auto ns = static_cast<Eigen::Index>(states.size()), nt = static_cast<Eigen::Index>(times.size());
  out.f1 = Eigen::MatrixXd::Zero(ns, nt);
  out.f2 = Eigen::MatrixXd::Zero(ns, nt);
  parallel_for(states.size(), [&](std::size_t i) {
    const CVec &xi = states[i];
    const CVec psi0 = p.embed_state(xi);
    const CVec c_full = full.vectors.adjoint() * psi0;
    const CVec c_eff = eff.vectors.adjoint() * xi;
    for (Eigen::Index k = 0; k < nt; ++k) {
      const double t = times[static_cast<std::size_t>(k)];
      CVec a = c_full, b = c_eff;
      for (Eigen::Index m = 0; m < a.size(); ++m) a(m) *= std::exp(cplx(0.0, -t * full.values(m)));
      for (Eigen::Index m = 0; m < b.size(); ++m) b(m) *= std::exp(cplx(0.0, -t * eff.values(m)));
      const CVec psi = full.vectors * a;
      const CVec psi_eff = eff.vectors * b;
      const DenseOp rho = reduced_density(psi, p.n_qubits(), p.effective());
      out.f1(static_cast<Eigen::Index>(i), k) = psi_eff.dot(rho * psi_eff).real();
      out.f2(static_cast<Eigen::Index>(i), k) = xi.dot(rho * xi).real();
    }
  });
  out.f1_stats = column_stats(out.f1);
  out.f2_stats = column_stats(out.f2);
  return out;
}

struct CorrelationSeries {
  std::vector<double> times;
  std::vector<double> values;
  /// Column of U0^dag H0 U0 taken as the ground state.
  int ground_index = 0;
};

inline PauliString axis_string(int n, int qubit, char axis) {
  if (qubit < 0 || qubit >= n) throw Error(ErrorKind::IndexOutOfRange, "correlation qubit");
  switch (axis) {
    case 'x': case 'X': return PauliString::single(n, qubit, Letter::X);
    case 'y': case 'Y': return PauliString::single(n, qubit, Letter::Y);
    case 'z': case 'Z': return PauliString::single(n, qubit, Letter::Z);
    default: throw Error(ErrorKind::InvalidArgument, std::string("axis must be x, y or z, got '") + axis + "'");
  }
}

struct CorrelationOptions {
  int qubit = 0;
  /// Use only the diagonal of H~.
  bool diagonal_only = false;
};

/// Re <g0| S e^{-it H~} S |g0> with S = U^dag sigma U, g0 the lowest
/// eigenvector of U0^dag H0 U0 (lowest index among degenerate ones).
inline CorrelationSeries correlation(const VagtResult &result, char axis, const std::vector<double> &times,
                                     const CorrelationOptions &opts = {}) {
  const int n = result.pair.n_qubits;
  const DenseOp sigma = to_dense(axis_string(n, opts.qubit, axis));
  const DenseOp s = result.unitary.adjoint() * sigma * result.unitary;
  const DenseOp u0 = result.spec.u0_matrix();
  const EigenSystem h0 = eig(rotate_hamiltonian(to_dense(result.pair.h0), u0));
  CorrelationSeries out;
  out.times = times;
  const CVec g0 = h0.vectors.col(0);
  Eigen::Index idx = 0;
  g0.cwiseAbs().maxCoeff(&idx);
  out.ground_index = static_cast<int>(idx);
  DenseOp ht = result.htilde_dense;
  if (opts.diagonal_only) ht = DenseOp(ht.diagonal().asDiagonal());
  const EigenSystem es = eig(0.5 * (ht + ht.adjoint()));
  const CVec left = s * g0;
  const CVec cl = es.vectors.adjoint() * left;
  for (double t : times) {
    CVec c = cl;
    for (Eigen::Index m = 0; m < c.size(); ++m) c(m) *= std::exp(cplx(0.0, -t * es.values(m)));
    out.values.push_back(left.dot(es.vectors * c).real());
  }
  return out;
}

/// Re <g| sigma e^{-itH} sigma |g> on the exact ground state of H_lambda.
inline CorrelationSeries exact_correlation(const HamiltonianPair &pair, char axis, const std::vector<double> &times,
                                           int qubit = 0) {
  const DenseOp sigma = to_dense(axis_string(pair.n_qubits, qubit, axis));
  const EigenSystem es = eig(pair.dense(pair.lambda));
  const CVec left = sigma * es.vectors.col(0);
  const CVec cl = es.vectors.adjoint() * left;
  CorrelationSeries out;
  out.times = times;
  for (double t : times) {
    CVec c = cl;
    for (Eigen::Index m = 0; m < c.size(); ++m) c(m) *= std::exp(cplx(0.0, -t * es.values(m)));
    out.values.push_back(left.dot(es.vectors * c).real());
  }
  return out;
}

}  // namespace vagt
