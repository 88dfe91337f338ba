#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vagt/dense.hpp"
#include "vagt/error.hpp"
#include "vagt/pauli.hpp"
#include "vagt/simulator.hpp"

namespace vagt {

/// U = U0 e_1 e_2 ... e_M with e_m = exp(-i alpha_{column(m)} B_m).
/// Members sharing a column form one free parameter; members in a tie group
/// must commute with each other.
struct AnsatzSpec {
  int n_qubits = 1;
  std::string name;
  Circuit u0{1};
  /// Replaces `u0` when U0 is only known as a matrix.
  std::optional<DenseOp> u0_dense;
  std::vector<PauliString> generators;
  std::vector<int> column_of;
  /// Qubit pair whose swap commutes with every tie group, if declared.
  std::optional<std::pair<int, int>> swap_symmetry;
  /// Human-readable layer sequence.
  std::string layout;

  int n_members() const { return static_cast<int>(generators.size()); }
  int n_params() const {
    int m = 0;
    for (int c : column_of) m = std::max(m, c + 1);
    return m;
  }
  bool has_circuit_u0() const { return !u0_dense.has_value(); }

  DenseOp u0_matrix() const { return u0_dense ? *u0_dense : u0.to_matrix(); }

  /// Member indices of each column, in product order.
  std::vector<std::vector<int>> ties() const {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(n_params()));
    for (int m = 0; m < n_members(); ++m) out[static_cast<std::size_t>(column_of[static_cast<std::size_t>(m)])].push_back(m);
    return out;
  }

  void validate() const {
    if (n_qubits < 1) throw Error(ErrorKind::InvalidArgument, "ansatz qubit count");
    if (generators.empty()) throw Error(ErrorKind::InvalidArgument, "ansatz has no generators");
    if (column_of.size() != generators.size())
      throw Error(ErrorKind::SizeMismatch, "column map does not cover every generator");
    if (u0_dense) {
      const Eigen::Index dim = Eigen::Index{1} << n_qubits;
      if (u0_dense->rows() != dim || u0_dense->cols() != dim)
        throw Error(ErrorKind::BadDimension, "dense U0 dimension");
      if (!is_unitary(*u0_dense, 1e-9)) throw Error(ErrorKind::InvalidArgument, "dense U0 is not unitary");
    } else if (u0.n_qubits() != n_qubits) {
      throw Error(ErrorKind::SizeMismatch, "U0 circuit size");
    }
    for (const PauliString &b : generators) {
      if (b.n_qubits() != n_qubits) throw Error(ErrorKind::SizeMismatch, "generator " + b.str());
      if (b.is_identity() || b.weight() > 2)
        throw Error(ErrorKind::InvalidArgument, "generator " + b.str() + " must act on one or two qubits");
    }
    const auto groups = ties();
    for (const auto &g : groups) {
      if (g.empty()) throw Error(ErrorKind::InvalidArgument, "parameter column without generators");
      for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = i + 1; j < g.size(); ++j)
          if (!commutes(generators[static_cast<std::size_t>(g[i])], generators[static_cast<std::size_t>(g[j])]))
            throw Error(ErrorKind::InvalidArgument, "tied generators must commute");
    }
    if (swap_symmetry) {
      const auto [a, b] = *swap_symmetry;
      if (a < 0 || b < 0 || a >= n_qubits || b >= n_qubits || a == b)
        throw Error(ErrorKind::IndexOutOfRange, "swap symmetry qubits");
      if (n_qubits <= 4) {
        const DenseOp s = swap_matrix(n_qubits, a, b);
        for (const auto &g : groups) {
          PauliSum sum(n_qubits);
          for (int m : g) sum.add(generators[static_cast<std::size_t>(m)], 1.0);
          const DenseOp d = to_dense(sum);
          if ((d * s - s * d).cwiseAbs().maxCoeff() > 1e-10)
            throw Error(ErrorKind::InvalidArgument, "tie group breaks the declared swap symmetry");
        }
      }
    }
  }

  static DenseOp swap_matrix(int n, int a, int b) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    DenseOp s = DenseOp::Zero(dim, dim);
    const int ba = n - 1 - a, bb = n - 1 - b;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const Eigen::Index xa = (i >> ba) & 1, xb = (i >> bb) & 1;
      Eigen::Index j = i & ~((Eigen::Index{1} << ba) | (Eigen::Index{1} << bb));
      j |= (xa << bb) | (xb << ba);
      s(j, i) = 1.0;
    }
    return s;
  }
};

/// alpha(t, c) for t = 0..T and parameter column c; row 0 stays zero.
struct ParamTable {
  Eigen::MatrixXd alpha;
  double lambda = 0.0;
  double delta_mu = 0.0;

  ParamTable() = default;
  ParamTable(int steps, int n_params, double lambda_)
      : alpha(Eigen::MatrixXd::Zero(steps + 1, n_params)), lambda(lambda_),
        delta_mu(lambda_ / static_cast<double>(steps)) {
    if (steps < 1) throw Error(ErrorKind::InvalidArgument, "T must be at least 1");
  }

  int steps() const { return static_cast<int>(alpha.rows()) - 1; }
  Eigen::VectorXd row(int t) const { return alpha.row(t).transpose(); }
};

namespace detail {

inline void check_row(const AnsatzSpec &spec, const Eigen::VectorXd &row) {
  if (row.size() != spec.n_params())
    throw Error(ErrorKind::SizeMismatch, "parameter row has " + std::to_string(row.size()) + " entries, ansatz needs " +
                                             std::to_string(spec.n_params()));
}

inline void check_ell(const AnsatzSpec &spec, int ell) {
  if (ell < 1 || ell > spec.n_members() + 1)
    throw Error(ErrorKind::IndexOutOfRange, "layer index " + std::to_string(ell));
}

inline double member_angle(const AnsatzSpec &spec, const Eigen::VectorXd &row, int m) {
  return row(spec.column_of[static_cast<std::size_t>(m)]);
}

}  // namespace detail

/// Circuit for U^ell = U0 e_1 ... e_{ell-1}; members are 1-based, and
/// ell = n_members + 1 gives the full unitary. Gates run e_{ell-1} first and
/// U0 last.
inline Circuit partial_unitary(const AnsatzSpec &spec, const Eigen::VectorXd &row, int ell) {
  detail::check_row(spec, row);
  detail::check_ell(spec, ell);
  if (!spec.has_circuit_u0()) throw Error(ErrorKind::NonCircuitU0, "U0 is only available as a matrix");
  Circuit c(spec.n_qubits);
  for (int m = ell - 2; m >= 0; --m)
    c.add(Gate::pauli_rotation(spec.generators[static_cast<std::size_t>(m)], detail::member_angle(spec, row, m)));
  c.append(spec.u0);
  return c;
}

inline Circuit full_unitary(const AnsatzSpec &spec, const Eigen::VectorXd &row) {
  return partial_unitary(spec, row, spec.n_members() + 1);
}

/// Ansatz factors after U0, as a circuit; valid for matrix-only U0 too.
inline Circuit rotation_circuit(const AnsatzSpec &spec, const Eigen::VectorXd &row, int ell) {
  detail::check_row(spec, row);
  detail::check_ell(spec, ell);
  Circuit c(spec.n_qubits);
  for (int m = ell - 2; m >= 0; --m)
    c.add(Gate::pauli_rotation(spec.generators[static_cast<std::size_t>(m)], detail::member_angle(spec, row, m)));
  return c;
}

inline DenseOp partial_unitary_matrix(const AnsatzSpec &spec, const Eigen::VectorXd &row, int ell) {
  return spec.u0_matrix() * rotation_circuit(spec, row, ell).to_matrix();
}

inline DenseOp full_unitary_matrix(const AnsatzSpec &spec, const Eigen::VectorXd &row) {
  return partial_unitary_matrix(spec, row, spec.n_members() + 1);
}

/// O^ell = U^ell B_ell (U^ell)^dag, 1 <= ell <= n_members.
inline PauliSum rotated_generator(const AnsatzSpec &spec, const Eigen::VectorXd &row, int ell) {
  if (ell < 1 || ell > spec.n_members()) throw Error(ErrorKind::IndexOutOfRange, "layer index " + std::to_string(ell));
  const DenseOp u = partial_unitary_matrix(spec, row, ell);
  const DenseOp o = u * to_dense(spec.generators[static_cast<std::size_t>(ell - 1)]) * u.adjoint();
  return decompose(0.5 * (o + o.adjoint()));
}

namespace detail {

struct AnsatzBuilder {
  AnsatzSpec spec;
  int next_column = 0;

  explicit AnsatzBuilder(int n, std::string name) {
    spec.n_qubits = n;
    spec.name = std::move(name);
    spec.u0 = Circuit(n);
  }

  /// One free parameter driving every string in `group`.
  void tie(std::initializer_list<const char *> group) {
    for (const char *letters : group) {
      spec.generators.push_back(PauliString::from_letters(letters));
      spec.column_of.push_back(next_column);
    }
    ++next_column;
  }

  /// Single-qubit `letter` on qubit q of an n-qubit register.
  static std::string on(int n, int q, char letter) {
    std::string s(static_cast<std::size_t>(n), 'I');
    s[static_cast<std::size_t>(q)] = letter;
    return s;
  }
  static std::string on2(int n, int a, int b, char letter) {
    std::string s(static_cast<std::size_t>(n), 'I');
    s[static_cast<std::size_t>(a)] = letter;
    s[static_cast<std::size_t>(b)] = letter;
    return s;
  }
  void tie_strings(const std::vector<std::string> &group) {
    for (const std::string &letters : group) {
      spec.generators.push_back(PauliString::from_letters(letters));
      spec.column_of.push_back(next_column);
    }
    ++next_column;
  }
};

}  // namespace detail

/// Builtin ansatz by name.
///   lowenergy36    N=3. Three repetitions of a rotation block and a coupling
///                  block. Rotation block: X{1,2} X3 Y{1,2} Y3 Z{1,2} Z3.
///                  Coupling block: XY{13,23} YX{13,23} YZ{13,23} XX12
///                  {XY,YX}12 {YZ,ZY}12. Braces mark tied members (one
///                  parameter).
///   lowenergy36_xyz  Same rotation block, coupling block XX{13,23} XX12
///                  YY{13,23} YY12 ZZ{13,23} ZZ12. Every gradient vanishes at
///                  alpha = 0 on the low-energy model, so it never leaves the
///                  identity there.
///   spinchain140   N=4. Ten repetitions of X on each qubit, Y on each
///                  qubit, YY and ZZ on each nearest-neighbour pair.
///   universal2q15  N=2. One rotation per non-identity Pauli string, in
///                  code order IX IY IZ XI XX ... ZZ.
///   universal2q15_euler  N=2. X1 Y1 X1 X2 Y2 X2, then XX YY ZZ, then
///                  X1 Y1 X1 X2 Y2 X2.
inline AnsatzSpec builtin_ansatz(const std::string &name, int n_qubits = 0) {
  using detail::AnsatzBuilder;
  if (name == "lowenergy36" || name == "lowenergy36_xyz") {
    if (n_qubits != 0 && n_qubits != 3) throw Error(ErrorKind::InvalidArgument, name + " is a 3-qubit ansatz");
    const bool xyz = name == "lowenergy36_xyz";
    AnsatzBuilder b(3, name);
    for (int rep = 0; rep < 3; ++rep) {
      for (const char l : {'X', 'Y', 'Z'}) {
        b.tie_strings({AnsatzBuilder::on(3, 0, l), AnsatzBuilder::on(3, 1, l)});
        b.tie_strings({AnsatzBuilder::on(3, 2, l)});
      }
      if (xyz) {
        for (const char l : {'X', 'Y', 'Z'}) {
          b.tie_strings({AnsatzBuilder::on2(3, 0, 2, l), AnsatzBuilder::on2(3, 1, 2, l)});
          b.tie_strings({AnsatzBuilder::on2(3, 0, 1, l)});
        }
      } else {
        b.tie({"XIY", "IXY"});
        b.tie({"YIX", "IYX"});
        b.tie({"YIZ", "IYZ"});
        b.tie({"XXI"});
        b.tie({"XYI", "YXI"});
        b.tie({"YZI", "ZYI"});
      }
    }
    b.spec.swap_symmetry = std::make_pair(0, 1);
    b.spec.layout = xyz ? "3 x [X{1,2} X3 Y{1,2} Y3 Z{1,2} Z3 | XX{13,23} XX12 YY{13,23} YY12 ZZ{13,23} ZZ12]"
                        : "3 x [X{1,2} X3 Y{1,2} Y3 Z{1,2} Z3 | XY{13,23} YX{13,23} YZ{13,23} XX12 {XY,YX}12 {YZ,ZY}12]";
    b.spec.validate();
    return b.spec;
  }
  if (name == "spinchain140") {
    const int n = n_qubits == 0 ? 4 : n_qubits;
    if (n < 2) throw Error(ErrorKind::InvalidArgument, "spinchain140 needs at least 2 qubits");
    AnsatzBuilder b(n, name);
    for (int rep = 0; rep < 10; ++rep) {
      for (const char l : {'X', 'Y'})
        for (int q = 0; q < n; ++q) b.tie_strings({AnsatzBuilder::on(n, q, l)});
      for (const char l : {'Y', 'Z'})
        for (int q = 0; q + 1 < n; ++q) b.tie_strings({AnsatzBuilder::on2(n, q, q + 1, l)});
    }
    b.spec.layout = "10 x [X_i | Y_i | Y_iY_{i+1} | Z_iZ_{i+1}]";
    b.spec.validate();
    return b.spec;
  }
  if (name == "universal2q15") {
    if (n_qubits != 0 && n_qubits != 2) throw Error(ErrorKind::InvalidArgument, "universal2q15 is a 2-qubit ansatz");
    AnsatzBuilder b(2, name);
    for (std::uint64_t c = 1; c < 16; ++c) b.tie_strings({PauliString(2, c).str()});
    b.spec.layout = "IX IY IZ XI XX XY XZ YI YX YY YZ ZI ZX ZY ZZ";
    b.spec.validate();
    return b.spec;
  }
  if (name == "universal2q15_euler") {
    if (n_qubits != 0 && n_qubits != 2) throw Error(ErrorKind::InvalidArgument, name + " is a 2-qubit ansatz");
    AnsatzBuilder b(2, name);
    auto local = [&] {
      for (const char *s : {"XI", "YI", "XI", "IX", "IY", "IX"}) b.tie({s});
    };
    local();
    for (const char *s : {"XX", "YY", "ZZ"}) b.tie({s});
    local();
    b.spec.layout = "X1 Y1 X1 X2 Y2 X2 | XX YY ZZ | X1 Y1 X1 X2 Y2 X2";
    b.spec.validate();
    return b.spec;
  }
  throw Error(ErrorKind::UnknownName, "unknown ansatz '" + name + "'");
}

// JSON form: {"n_qubits": 2, "u0": [gates], "generators": ["XI", ...],
// "ties": [[0, 1], ...], "swap_symmetry": [0, 1]}. Member indices are
// 0-based; members outside any tie get their own parameter.

inline nlohmann::json gate_to_json(const Gate &g) {
  nlohmann::json j;
  j["kind"] = to_string(g.kind);
  j["targets"] = g.targets;
  if (!g.controls.empty()) j["controls"] = g.controls;
  switch (g.kind) {
    case GateKind::Rx:
    case GateKind::Ry:
    case GateKind::Rz: j["theta"] = g.theta; break;
    case GateKind::PauliRotation:
      j["pauli"] = g.pauli.str();
      j["theta"] = g.theta;
      break;
    case GateKind::Pauli:
      j["pauli"] = g.pauli.str();
      j["phase"] = {g.phase.real(), g.phase.imag()};
      break;
    case GateKind::Unitary: {
      nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
      for (Eigen::Index r = 0; r < g.matrix.rows(); ++r) {
        std::vector<double> a, b;
        for (Eigen::Index c = 0; c < g.matrix.cols(); ++c) {
          a.push_back(g.matrix(r, c).real());
          b.push_back(g.matrix(r, c).imag());
        }
        re.push_back(a);
        im.push_back(b);
      }
      j["re"] = re;
      j["im"] = im;
      break;
    }
    default: break;
  }
  return j;
}

inline Gate gate_from_json(const nlohmann::json &j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const std::vector<int> targets = j.at("targets").get<std::vector<int>>();
    auto one = [&] {
      if (targets.size() != 1) throw Error(ErrorKind::ConfigError, kind + " takes one target");
      return targets[0];
    };
    Gate g;
    if (kind == "h") g = Gate::h(one());
    else if (kind == "rx") g = Gate::rx(one(), j.at("theta").get<double>());
    else if (kind == "ry") g = Gate::ry(one(), j.at("theta").get<double>());
    else if (kind == "rz") g = Gate::rz(one(), j.at("theta").get<double>());
    else if (kind == "cnot") {
      if (targets.size() != 2) throw Error(ErrorKind::ConfigError, "cnot takes [control, target]");
      g = Gate::cnot(targets[0], targets[1]);
    } else if (kind == "pauli_rotation") {
      g = Gate::pauli_rotation(PauliString::from_letters(j.at("pauli").get<std::string>()), j.at("theta").get<double>(), targets);
    } else if (kind == "pauli") {
      cplx phase = 1.0;
      if (j.contains("phase")) {
        const auto p = j.at("phase").get<std::vector<double>>();
        if (p.size() != 2) throw Error(ErrorKind::ConfigError, "phase is [re, im]");
        phase = {p[0], p[1]};
      }
      g = Gate::pauli_string(PauliString::from_letters(j.at("pauli").get<std::string>()), targets, phase);
    } else if (kind == "unitary") {
      const auto re = j.at("re").get<std::vector<std::vector<double>>>();
      const auto im = j.at("im").get<std::vector<std::vector<double>>>();
      const Eigen::Index d = static_cast<Eigen::Index>(re.size());
      DenseOp m(d, d);
      for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c)
          m(r, c) = {re.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)),
                     im.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c))};
      g = Gate::unitary(m, targets);
    } else {
      throw Error(ErrorKind::UnknownName, "unknown gate kind '" + kind + "'");
    }
    if (j.contains("controls")) g.controls = j.at("controls").get<std::vector<int>>();
    return g;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::ConfigError, std::string("gate: ") + e.what());
  }
}

inline nlohmann::json ansatz_to_json(const AnsatzSpec &spec) {
  nlohmann::json j;
  j["n_qubits"] = spec.n_qubits;
  if (!spec.name.empty()) j["name"] = spec.name;
  nlohmann::json gates = nlohmann::json::array();
  for (const Gate &g : spec.u0.gates()) gates.push_back(gate_to_json(g));
  j["u0"] = gates;
  std::vector<std::string> gens;
  for (const PauliString &p : spec.generators) gens.push_back(p.str());
  j["generators"] = gens;
  nlohmann::json ties = nlohmann::json::array();
  for (const auto &g : spec.ties())
    if (g.size() > 1) ties.push_back(g);
  j["ties"] = ties;
  if (spec.swap_symmetry) j["swap_symmetry"] = {spec.swap_symmetry->first, spec.swap_symmetry->second};
  if (!spec.layout.empty()) j["layout"] = spec.layout;
  if (spec.u0_dense) j["u0_mode"] = "matrix";
  return j;
}

inline AnsatzSpec ansatz_from_json(const nlohmann::json &j) {
  static const std::vector<std::string> known = {"n_qubits", "name", "u0", "u0_mode", "generators", "ties", "swap_symmetry", "layout"};
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "ansatz must be an object");
  for (const auto &[key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw Error(ErrorKind::ConfigError, "unknown ansatz field '" + key + "'");
  try {
    AnsatzSpec spec;
    spec.n_qubits = j.at("n_qubits").get<int>();
    spec.name = j.value("name", std::string("custom"));
    spec.layout = j.value("layout", std::string());
    spec.u0 = Circuit(spec.n_qubits);
    if (j.contains("u0"))
      for (const auto &g : j.at("u0")) spec.u0.add(gate_from_json(g));
    for (const auto &s : j.at("generators")) spec.generators.push_back(PauliString::from_letters(s.get<std::string>()));
    const int m = spec.n_members();
    std::vector<int> group_of(static_cast<std::size_t>(m), -1);
    std::vector<std::vector<int>> groups;
    if (j.contains("ties"))
      for (const auto &t : j.at("ties")) {
        std::vector<int> g = t.get<std::vector<int>>();
        for (int idx : g) {
          if (idx < 0 || idx >= m) throw Error(ErrorKind::ConfigError, "tie index out of range");
          if (group_of[static_cast<std::size_t>(idx)] >= 0) throw Error(ErrorKind::ConfigError, "member tied twice");
          group_of[static_cast<std::size_t>(idx)] = static_cast<int>(groups.size());
        }
        groups.push_back(g);
      }
    std::vector<int> column_of_group(groups.size(), -1);
    int next = 0;
    spec.column_of.assign(static_cast<std::size_t>(m), -1);
    for (int i = 0; i < m; ++i) {
      const int g = group_of[static_cast<std::size_t>(i)];
      if (g < 0) {
        spec.column_of[static_cast<std::size_t>(i)] = next++;
      } else {
        if (column_of_group[static_cast<std::size_t>(g)] < 0) column_of_group[static_cast<std::size_t>(g)] = next++;
        spec.column_of[static_cast<std::size_t>(i)] = column_of_group[static_cast<std::size_t>(g)];
      }
    }
    if (j.contains("swap_symmetry")) {
      const auto s = j.at("swap_symmetry").get<std::vector<int>>();
      if (s.size() != 2) throw Error(ErrorKind::ConfigError, "swap_symmetry is a qubit pair");
      spec.swap_symmetry = std::make_pair(s[0], s[1]);
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::ConfigError, std::string("ansatz: ") + e.what());
  }
}

}  // namespace vagt
