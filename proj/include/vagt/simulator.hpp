#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vagt/dense.hpp"
#include "vagt/error.hpp"
#include "vagt/pauli.hpp"
#include "vagt/rng.hpp"

namespace vagt {

enum class GateKind { H, Rx, Ry, Rz, CNOT, Pauli, PauliRotation, Unitary };

inline const char *to_string(GateKind k) {
  switch (k) {
    case GateKind::H: return "h";
    case GateKind::Rx: return "rx";
    case GateKind::Ry: return "ry";
    case GateKind::Rz: return "rz";
    case GateKind::CNOT: return "cnot";
    case GateKind::Pauli: return "pauli";
    case GateKind::PauliRotation: return "pauli_rotation";
    case GateKind::Unitary: return "unitary";
  }
  return "?";
}

/// One gate with optional extra controls (all must read 1).
///   H, Rx, Ry, Rz   targets = {q}; rotations are exp(-i theta sigma / 2)
///   CNOT            targets = {control, target}
///   Pauli           phase * pauli, pauli spans targets
///   PauliRotation   exp(-i theta pauli), pauli spans targets
///   Unitary         matrix on up to 3 targets, targets[0] most significant
struct Gate {
  GateKind kind = GateKind::H;
  std::vector<int> targets;
  std::vector<int> controls;
  double theta = 0.0;
  PauliString pauli;
  cplx phase{1.0, 0.0};
  DenseOp matrix;

  static Gate h(int q) { return {GateKind::H, {q}}; }
  static Gate rx(int q, double theta) { return {GateKind::Rx, {q}, {}, theta}; }
  static Gate ry(int q, double theta) { return {GateKind::Ry, {q}, {}, theta}; }
  static Gate rz(int q, double theta) { return {GateKind::Rz, {q}, {}, theta}; }
  static Gate cnot(int control, int target) { return {GateKind::CNOT, {control, target}}; }

  /// `p` spans `targets` (or qubits 0..n-1 when targets is empty).
  static Gate pauli_string(const PauliString &p, std::vector<int> targets = {}, cplx phase = 1.0) {
    Gate g{GateKind::Pauli, fill_targets(p, std::move(targets))};
    g.pauli = p;
    g.phase = phase;
    return g;
  }
  static Gate pauli_rotation(const PauliString &p, double theta, std::vector<int> targets = {}) {
    Gate g{GateKind::PauliRotation, fill_targets(p, std::move(targets))};
    g.pauli = p;
    g.theta = theta;
    return g;
  }
  static Gate unitary(const DenseOp &m, std::vector<int> targets) {
    const int k = static_cast<int>(targets.size());
    if (k < 1 || k > 3) throw Error(ErrorKind::InvalidArgument, "raw unitary acts on 1 to 3 qubits");
    if (m.rows() != (Eigen::Index{1} << k) || m.cols() != m.rows())
      throw Error(ErrorKind::BadDimension, "raw unitary dimension");
    if (!is_unitary(m)) throw Error(ErrorKind::InvalidArgument, "raw gate matrix is not unitary");
    Gate g{GateKind::Unitary, std::move(targets)};
    g.matrix = m;
    return g;
  }

  /// Local matrix over `targets`, controls excluded.
  DenseOp local_matrix() const {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    const cplx I{0.0, 1.0};
    DenseOp m(2, 2);
    switch (kind) {
      case GateKind::H:
        m << 1, 1, 1, -1;
        return m / std::numbers::sqrt2;
      case GateKind::Rx:
        m << c, -I * s, -I * s, c;
        return m;
      case GateKind::Ry:
        m << c, -s, s, c;
        return m;
      case GateKind::Rz:
        m << std::exp(-I * (theta / 2)), 0, 0, std::exp(I * (theta / 2));
        return m;
      case GateKind::CNOT: {
        DenseOp cx = DenseOp::Identity(4, 4);
        cx(2, 2) = cx(3, 3) = 0;
        cx(2, 3) = cx(3, 2) = 1;
        return cx;
      }
      case GateKind::Pauli: return phase * to_dense(pauli);
      case GateKind::PauliRotation: {
        const DenseOp p = to_dense(pauli);
        return std::cos(theta) * DenseOp::Identity(p.rows(), p.cols()) - I * std::sin(theta) * p;
      }
      case GateKind::Unitary: return matrix;
    }
    return m;
  }

  int max_qubit() const {
    int m = -1;
    for (int q : targets) m = std::max(m, q);
    for (int q : controls) m = std::max(m, q);
    return m;
  }

 private:
  static std::vector<int> fill_targets(const PauliString &p, std::vector<int> targets) {
    if (targets.empty())
      for (int q = 0; q < p.n_qubits(); ++q) targets.push_back(q);
    if (static_cast<int>(targets.size()) != p.n_qubits())
      throw Error(ErrorKind::SizeMismatch, "Pauli gate targets do not match string length");
    return targets;
  }
};

inline Gate adjoint(Gate g) {
  switch (g.kind) {
    case GateKind::H:
    case GateKind::CNOT: break;
    case GateKind::Rx:
    case GateKind::Ry:
    case GateKind::Rz:
    case GateKind::PauliRotation: g.theta = -g.theta; break;
    case GateKind::Pauli: g.phase = std::conj(g.phase); break;
    case GateKind::Unitary: g.matrix = g.matrix.adjoint().eval(); break;
  }
  return g;
}

inline Gate transpose(Gate g) {
  switch (g.kind) {
    case GateKind::H:
    case GateKind::CNOT:
    case GateKind::Rx:
    case GateKind::Rz: break;
    case GateKind::Ry: g.theta = -g.theta; break;
    case GateKind::Pauli: g.phase *= transpose_parity(g.pauli); break;
    case GateKind::PauliRotation: g.theta *= transpose_parity(g.pauli); break;
    case GateKind::Unitary: g.matrix = g.matrix.transpose().eval(); break;
  }
  return g;
}

/// Ordered gate list; gates act in list order (first gate first).
class Circuit {
 public:
  explicit Circuit(int n_qubits = 1) : n_(n_qubits) {
    if (n_qubits < 1 || n_qubits > 30) throw Error(ErrorKind::InvalidArgument, "circuit qubit count");
  }

  int n_qubits() const noexcept { return n_; }
  const std::vector<Gate> &gates() const noexcept { return gates_; }
  std::size_t size() const noexcept { return gates_.size(); }
  bool empty() const noexcept { return gates_.empty(); }

  Circuit &add(Gate g) {
    for (int q : g.targets)
      if (q < 0 || q >= n_) throw Error(ErrorKind::IndexOutOfRange, "gate target outside circuit");
    for (int q : g.controls) {
      if (q < 0 || q >= n_) throw Error(ErrorKind::IndexOutOfRange, "gate control outside circuit");
      for (int t : g.targets)
        if (t == q) throw Error(ErrorKind::InvalidArgument, "control coincides with target");
    }
    gates_.push_back(std::move(g));
    return *this;
  }

  /// Appends `other` with its qubit q mapped to q + offset.
  Circuit &append(const Circuit &other, int offset = 0) {
    if (offset < 0 || offset + other.n_qubits() > n_)
      throw Error(ErrorKind::IndexOutOfRange, "appended circuit does not fit");
    for (Gate g : other.gates_) {
      for (int &q : g.targets) q += offset;
      for (int &q : g.controls) q += offset;
      add(std::move(g));
    }
    return *this;
  }

  /// Same gates with `control` added to each.
  Circuit controlled(int control) const {
    Circuit out(n_);
    for (Gate g : gates_) {
      g.controls.push_back(control);
      out.add(std::move(g));
    }
    return out;
  }

  Circuit inverse() const {
    Circuit out(n_);
    for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) out.gates_.push_back(adjoint(*it));
    return out;
  }

  Circuit transpose() const {
    Circuit out(n_);
    for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) out.gates_.push_back(vagt::transpose(*it));
    return out;
  }

  /// Gates in reverse order, each left as is.
  Circuit reversed() const {
    Circuit out(n_);
    out.gates_.assign(gates_.rbegin(), gates_.rend());
    return out;
  }

  DenseOp to_matrix() const;

  std::string str() const {
    std::ostringstream os;
    os << "circuit " << n_ << " qubits, " << gates_.size() << " gates\n";
    for (const Gate &g : gates_) {
      os << "  " << to_string(g.kind);
      if (g.kind == GateKind::Pauli || g.kind == GateKind::PauliRotation) os << ' ' << g.pauli.str();
      os << " [";
      for (std::size_t i = 0; i < g.targets.size(); ++i) os << (i ? "," : "") << g.targets[i];
      os << ']';
      if (!g.controls.empty()) {
        os << " ctrl[";
        for (std::size_t i = 0; i < g.controls.size(); ++i) os << (i ? "," : "") << g.controls[i];
        os << ']';
      }
      if (g.kind == GateKind::Rx || g.kind == GateKind::Ry || g.kind == GateKind::Rz ||
          g.kind == GateKind::PauliRotation)
        os << " theta=" << g.theta;
      if (g.kind == GateKind::Pauli && g.phase != cplx{1.0, 0.0}) os << " phase=" << g.phase;
      os << '\n';
    }
    return os.str();
  }

 private:
  int n_;
  std::vector<Gate> gates_;
};

class StateVector {
 public:
  explicit StateVector(int n_qubits) : n_(n_qubits) {
    if (n_qubits < 1 || n_qubits > 30) throw Error(ErrorKind::InvalidArgument, "state qubit count");
    amps_ = CVec::Zero(Eigen::Index{1} << n_qubits);
    amps_(0) = 1.0;
  }

  StateVector(int n_qubits, CVec amplitudes) : n_(n_qubits), amps_(std::move(amplitudes)) {
    if (amps_.size() != (Eigen::Index{1} << n_qubits))
      throw Error(ErrorKind::SizeMismatch, "amplitude count is not 2^n");
    if (std::abs(amps_.norm() - 1.0) > 1e-10)
      throw Error(ErrorKind::InvalidArgument, "state is not normalized");
  }

  static StateVector basis(int n_qubits, std::uint64_t index) {
    StateVector s(n_qubits);
    if (index >= static_cast<std::uint64_t>(s.amps_.size()))
      throw Error(ErrorKind::IndexOutOfRange, "basis index");
    s.amps_(0) = 0.0;
    s.amps_(static_cast<Eigen::Index>(index)) = 1.0;
    return s;
  }

  int n_qubits() const noexcept { return n_; }
  const CVec &amplitudes() const noexcept { return amps_; }
  double norm() const { return amps_.norm(); }

  StateVector &apply(const Gate &g) {
    if (g.max_qubit() >= n_) throw Error(ErrorKind::IndexOutOfRange, "gate exceeds state size");
    std::uint64_t cmask = 0;
    for (int q : g.controls) cmask |= bit(q);
    switch (g.kind) {
      case GateKind::CNOT:
        apply_pauli_masks(bit(g.targets[1]), 0, cmask | bit(g.targets[0]), 1.0);
        break;
      case GateKind::Pauli: {
        auto [xm, zm] = masks(g);
        apply_pauli_masks(xm, zm, cmask, g.phase);
        break;
      }
      case GateKind::PauliRotation: {
        auto [xm, zm] = masks(g);
        apply_rotation_masks(xm, zm, cmask, g.theta);
        break;
      }
      default: apply_matrix(g.local_matrix(), g.targets, cmask); break;
    }
    return *this;
  }

  StateVector &apply(const Circuit &c) {
    if (c.n_qubits() > n_) throw Error(ErrorKind::SizeMismatch, "circuit larger than state");
    for (const Gate &g : c.gates()) apply(g);
    return *this;
  }

  cplx inner(const StateVector &o) const {
    if (o.n_ != n_) throw Error(ErrorKind::SizeMismatch, "inner product sizes");
    return amps_.dot(o.amps_);
  }

  /// Probability that `qubit` reads 0.
  double probability_zero(int qubit) const {
    const std::uint64_t b = bit(qubit);
    double p = 0.0;
    for (Eigen::Index i = 0; i < amps_.size(); ++i)
      if ((static_cast<std::uint64_t>(i) & b) == 0) p += std::norm(amps_(i));
    return p;
  }

  /// Marginal distribution over `measured`, measured[0] being the most
  /// significant outcome bit.
  std::vector<double> probabilities(const std::vector<int> &measured) const {
    std::vector<double> p(std::size_t{1} << measured.size(), 0.0);
    for (Eigen::Index i = 0; i < amps_.size(); ++i) {
      std::size_t out = 0;
      for (int q : measured) out = (out << 1) | ((static_cast<std::uint64_t>(i) & bit(q)) ? 1 : 0);
      p[out] += std::norm(amps_(i));
    }
    return p;
  }

  /// Applies phase * sigma for a Pauli string over all qubits of the state.
  StateVector &apply_pauli(const PauliString &p, cplx phase = 1.0) {
    if (p.n_qubits() != n_) throw Error(ErrorKind::SizeMismatch, "Pauli size differs from state");
    apply_pauli_masks(p.x_mask(), p.z_mask(), 0, phase);
    return *this;
  }

 private:
  std::uint64_t bit(int q) const {
    if (q < 0 || q >= n_) throw Error(ErrorKind::IndexOutOfRange, "qubit index");
    return std::uint64_t{1} << (n_ - 1 - q);
  }

  std::pair<std::uint64_t, std::uint64_t> masks(const Gate &g) const {
    std::uint64_t xm = 0, zm = 0;
    for (std::size_t i = 0; i < g.targets.size(); ++i) {
      const Letter l = g.pauli.letter(static_cast<int>(i));
      if (l == Letter::X || l == Letter::Y) xm |= bit(g.targets[i]);
      if (l == Letter::Y || l == Letter::Z) zm |= bit(g.targets[i]);
    }
    return {xm, zm};
  }

  // phase * sigma |j> = phase i^{|x&z|} (-1)^{|z&j|} |j^x> on controlled indices.
  void apply_pauli_masks(std::uint64_t xm, std::uint64_t zm, std::uint64_t cmask, cplx phase) {
    const cplx base = phase * detail::i_power(std::popcount(xm & zm));
    const std::uint64_t dim = static_cast<std::uint64_t>(amps_.size());
    if (xm == 0) {
      for (std::uint64_t j = 0; j < dim; ++j) {
        if ((j & cmask) != cmask) continue;
        amps_(j) *= (std::popcount(zm & j) & 1) ? -base : base;
      }
      return;
    }
    const std::uint64_t pivot = std::uint64_t{1} << (63 - std::countl_zero(xm));
    for (std::uint64_t j = 0; j < dim; ++j) {
      if ((j & pivot) || (j & cmask) != cmask) continue;
      const std::uint64_t k = j ^ xm;
      const cplx aj = amps_(j), ak = amps_(k);
      amps_(k) = ((std::popcount(zm & j) & 1) ? -base : base) * aj;
      amps_(j) = ((std::popcount(zm & k) & 1) ? -base : base) * ak;
    }
  }

  // exp(-i theta sigma) = cos theta - i sin theta sigma.
  void apply_rotation_masks(std::uint64_t xm, std::uint64_t zm, std::uint64_t cmask, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    const cplx f = cplx{0.0, -s} * detail::i_power(std::popcount(xm & zm));
    const std::uint64_t dim = static_cast<std::uint64_t>(amps_.size());
    if (xm == 0) {
      for (std::uint64_t j = 0; j < dim; ++j) {
        if ((j & cmask) != cmask) continue;
        amps_(j) *= c + ((std::popcount(zm & j) & 1) ? -f : f);
      }
      return;
    }
    const std::uint64_t pivot = std::uint64_t{1} << (63 - std::countl_zero(xm));
    for (std::uint64_t j = 0; j < dim; ++j) {
      if ((j & pivot) || (j & cmask) != cmask) continue;
      const std::uint64_t k = j ^ xm;
      const cplx aj = amps_(j), ak = amps_(k);
      amps_(j) = c * aj + ((std::popcount(zm & k) & 1) ? -f : f) * ak;
      amps_(k) = c * ak + ((std::popcount(zm & j) & 1) ? -f : f) * aj;
    }
  }

  void apply_matrix(const DenseOp &m, const std::vector<int> &targets, std::uint64_t cmask) {
    const int k = static_cast<int>(targets.size());
    const std::size_t local = std::size_t{1} << k;
    std::vector<std::uint64_t> offs(local, 0);
    std::uint64_t tmask = 0;
    for (int t : targets) tmask |= bit(t);
    for (std::size_t a = 0; a < local; ++a)
      for (int i = 0; i < k; ++i)
        if ((a >> (k - 1 - i)) & 1) offs[a] |= bit(targets[static_cast<std::size_t>(i)]);
    std::vector<cplx> in(local), out(local);
    const std::uint64_t dim = static_cast<std::uint64_t>(amps_.size());
    for (std::uint64_t j = 0; j < dim; ++j) {
      if ((j & tmask) || (j & cmask) != cmask) continue;
      for (std::size_t a = 0; a < local; ++a) in[a] = amps_(j | offs[a]);
      for (std::size_t r = 0; r < local; ++r) {
        cplx acc = 0.0;
        for (std::size_t a = 0; a < local; ++a)
          acc += m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a)) * in[a];
        out[r] = acc;
      }
      for (std::size_t a = 0; a < local; ++a) amps_(j | offs[a]) = out[a];
    }
  }

  int n_;
  CVec amps_;
};

inline DenseOp Circuit::to_matrix() const {
  const Eigen::Index dim = Eigen::Index{1} << n_;
  DenseOp m(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    StateVector s = StateVector::basis(n_, static_cast<std::uint64_t>(col));
    s.apply(*this);
    m.col(col) = s.amplitudes();
  }
  return m;
}

/// Seed and repetition count for finite-shot estimates.
struct ShotSampler {
  std::uint64_t seed = 0;
  std::uint64_t shots = 100;

  ShotSampler derive(std::initializer_list<std::uint64_t> path) const {
    return {derive_seed(seed, path), shots};
  }
};

/// Multinomial draw from a distribution: S uniforms binned by cumulative
/// probability.
inline std::vector<std::uint64_t> draw_counts(const std::vector<double> &probs, const ShotSampler &sampler) {
  if (sampler.shots < 1) throw Error(ErrorKind::InvalidArgument, "shot count must be positive");
  std::vector<double> cum(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) cum[i] = acc += std::max(0.0, probs[i]);
  std::vector<std::uint64_t> counts(probs.size(), 0);
  Rng rng(sampler.seed);
  for (std::uint64_t s = 0; s < sampler.shots; ++s) {
    const double u = rng.uniform() * acc;
    std::size_t i = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    if (i >= counts.size()) i = counts.size() - 1;
    ++counts[i];
  }
  return counts;
}

/// Runs `circuit` on |0...0> and samples the measured qubits; keys are
/// outcome bit strings with measured[0] most significant.
inline std::map<std::uint64_t, std::uint64_t> sample(const Circuit &circuit, const ShotSampler &sampler,
                                                     const std::vector<int> &measured) {
  StateVector s(circuit.n_qubits());
  s.apply(circuit);
  const std::vector<std::uint64_t> c = draw_counts(s.probabilities(measured), sampler);
  std::map<std::uint64_t, std::uint64_t> out;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i]) out[i] = c[i];
  return out;
}

/// Outcome-0 probability of one qubit, exact or estimated from shots.
inline double estimate_p0(const StateVector &s, int qubit, const std::optional<ShotSampler> &sampler) {
  const double p0 = s.probability_zero(qubit);
  if (!sampler) return p0;
  const auto counts = draw_counts({p0, 1.0 - p0}, *sampler);
  return static_cast<double>(counts[0]) / static_cast<double>(sampler->shots);
}

/// H on qubits [first, first+n) and CNOTs pairing qubit first+i with
/// first+n+i.
inline Circuit phi_circuit(int n, int total_qubits, int first = 0) {
  Circuit c(total_qubits);
  for (int i = 0; i < n; ++i) c.add(Gate::h(first + i));
  for (int i = 0; i < n; ++i) c.add(Gate::cnot(first + i, first + n + i));
  return c;
}

/// 2^{-n/2} sum_i |i>|i> on 2n qubits.
inline StateVector prepare_phi(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "prepare_phi needs n >= 1");
  StateVector s(2 * n);
  s.apply(phi_circuit(n, 2 * n));
  return s;
}

inline double expectation(const StateVector &state, const PauliSum &obs) {
  if (obs.n_qubits() != state.n_qubits()) throw Error(ErrorKind::SizeMismatch, "observable size");
  cplx total = 0.0;
  for (const auto &[code, c] : obs.terms()) {
    StateVector t = state;
    t.apply_pauli(PauliString(obs.n_qubits(), code));
    total += c * state.inner(t);
  }
  return total.real();
}

inline double expectation(const StateVector &state, const PauliString &p) {
  StateVector t = state;
  t.apply_pauli(p);
  return state.inner(t).real();
}

struct HadamardOutcome {
  double value;  // estimated operator expectation
  double p0;     // ancilla outcome-0 probability (exact or sampled)
};

inline void require_register(const Circuit &u, const PauliString &b, const PauliString &sj,
                             const PauliString &sk) {
  const int n = u.n_qubits();
  if (b.n_qubits() != n || sj.n_qubits() != n || sk.n_qubits() != n)
    throw Error(ErrorKind::SizeMismatch, "Hadamard test operand sizes differ");
}

/// <phi| sigma_j (x) i[U B U^dag, sigma_k] |phi> from an ancilla test on
/// 2N+1 qubits: ancilla 0, register A = 1..N, register B = N+1..2N. The
/// ancilla sees p0 = 1/2 - value/4.
inline HadamardOutcome hadamard_test_b(const Circuit &u, const PauliString &b, const PauliString &sigma_j,
                                       const PauliString &sigma_k,
                                       const std::optional<ShotSampler> &sampler = std::nullopt) {
  require_register(u, b, sigma_j, sigma_k);
  const int n = u.n_qubits();
  const int total = 2 * n + 1;
  Circuit c(total);
  c.add(Gate::h(0));
  c.append(phi_circuit(n, total, 1));
  Gate gj = Gate::pauli_string(sigma_j, {});
  Gate gk = Gate::pauli_string(sigma_k, {});
  for (int i = 0; i < n; ++i) {
    gj.targets[static_cast<std::size_t>(i)] = 1 + i;
    gk.targets[static_cast<std::size_t>(i)] = 1 + n + i;
  }
  gj.controls = {0};
  gk.controls = {0};
  c.add(gj).add(gk);
  Circuit ub(total);
  ub.append(u, n + 1);
  c.append(ub.inverse());
  Gate gb = Gate::pauli_string(b, {});
  for (int i = 0; i < n; ++i) gb.targets[static_cast<std::size_t>(i)] = 1 + n + i;
  gb.controls = {0};
  c.add(gb);
  c.append(ub);
  c.add(Gate::rx(0, std::numbers::pi / 2));
  StateVector s(total);
  s.apply(c);
  const double p0 = estimate_p0(s, 0, sampler);
  return {2.0 - 4.0 * p0, p0};
}

struct TestXOptions {
  /// Build V as the reversed gate list of U_ell instead of its transpose.
  /// Valid only for even Y-parity generators; anything else raises
  /// AsymmetricGenerator.
  bool symmetric_shortcut = false;
};

inline void check_symmetric_circuit(const Circuit &u, const PauliString &b) {
  if (transpose_parity(b) < 0)
    throw Error(ErrorKind::AsymmetricGenerator, "generator " + b.str() + " has odd Y parity");
  for (const Gate &g : u.gates()) {
    const bool bad = (g.kind == GateKind::Ry) ||
                     ((g.kind == GateKind::PauliRotation || g.kind == GateKind::Pauli) &&
                      transpose_parity(g.pauli) < 0) ||
                     (g.kind == GateKind::Unitary && (g.matrix - g.matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12);
    if (bad) throw Error(ErrorKind::AsymmetricGenerator, "ansatz gate is not transpose-symmetric");
  }
}

/// <phi| i[V^dag B_ell V, sigma_j] (x) i[U_l B_l U_l^dag, sigma_k] |phi> with
/// V the transpose of U_ell. Two ancillas (qubits 0 and 1) control the two
/// registers; after R_x on both and a CNOT onto ancilla 0, p0 = 1/2 + value/8.
inline HadamardOutcome hadamard_test_x(const Circuit &u_ell, const PauliString &b_ell, const Circuit &u_l,
                                       const PauliString &b_l, const PauliString &sigma_j,
                                       const PauliString &sigma_k,
                                       const std::optional<ShotSampler> &sampler = std::nullopt,
                                       TestXOptions options = {}) {
  require_register(u_ell, b_ell, sigma_j, sigma_k);
  require_register(u_l, b_l, sigma_j, sigma_k);
  const int n = u_l.n_qubits();
  const int total = 2 * n + 2;
  const int a0 = 0, a1 = 1, reg_a = 2, reg_b = 2 + n;
  if (options.symmetric_shortcut) check_symmetric_circuit(u_ell, b_ell);
  const Circuit v = options.symmetric_shortcut ? u_ell.reversed() : u_ell.transpose();

  auto placed = [&](const PauliString &p, int offset, int control) {
    Gate g = Gate::pauli_string(p, {});
    for (int i = 0; i < n; ++i) g.targets[static_cast<std::size_t>(i)] = offset + i;
    g.controls = {control};
    return g;
  };

  Circuit c(total);
  c.add(Gate::h(a0)).add(Gate::h(a1));
  c.append(phi_circuit(n, total, reg_a));

  Circuit va(total);
  va.append(v, reg_a);
  c.add(placed(sigma_j, reg_a, a0));
  c.append(va);
  c.add(placed(b_ell, reg_a, a0));
  c.append(va.inverse());

  Circuit ub(total);
  ub.append(u_l, reg_b);
  c.add(placed(sigma_k, reg_b, a1));
  c.append(ub.inverse());
  c.add(placed(b_l, reg_b, a1));
  c.append(ub);

  c.add(Gate::rx(a0, std::numbers::pi / 2)).add(Gate::rx(a1, std::numbers::pi / 2));
  c.add(Gate::cnot(a1, a0));
  StateVector s(total);
  s.apply(c);
  const double p0 = estimate_p0(s, a0, sampler);
  return {-4.0 + 8.0 * p0, p0};
}

/// <phi| sigma_h (x) U B U^dag |phi> via an ancilla prepared with R_y^dag,
/// controlled sigma_h (x) U B U^dag, then R_y before measurement, so that
/// p0 = 1/2 + value/2.
inline HadamardOutcome ry_test(const Circuit &u, const PauliString &b, const PauliString &sigma_h,
                               const std::optional<ShotSampler> &sampler = std::nullopt) {
  require_register(u, b, sigma_h, sigma_h);
  const int n = u.n_qubits();
  const int total = 2 * n + 1;
  Circuit c(total);
  c.add(Gate::ry(0, -std::numbers::pi / 2));
  c.append(phi_circuit(n, total, 1));
  Gate gh = Gate::pauli_string(sigma_h, {});
  for (int i = 0; i < n; ++i) gh.targets[static_cast<std::size_t>(i)] = 1 + i;
  gh.controls = {0};
  c.add(gh);
  Circuit ub(total);
  ub.append(u, n + 1);
  c.append(ub.inverse());
  Gate gb = Gate::pauli_string(b, {});
  for (int i = 0; i < n; ++i) gb.targets[static_cast<std::size_t>(i)] = 1 + n + i;
  gb.controls = {0};
  c.add(gb);
  c.append(ub);
  c.add(Gate::ry(0, std::numbers::pi / 2));
  StateVector s(total);
  s.apply(c);
  const double p0 = estimate_p0(s, 0, sampler);
  return {2.0 * p0 - 1.0, p0};
}

}  // namespace vagt
