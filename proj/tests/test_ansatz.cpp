#include <gtest/gtest.h>

#include <random>

#include "oracle_helpers.hpp"
#include "vagt/ansatz.hpp"

using namespace vagt;

namespace {

Eigen::VectorXd random_row(int p, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::VectorXd r(p);
  for (int i = 0; i < p; ++i) r(i) = d(rng);
  return r;
}

// U0 e_1 ... e_{ell-1} from explicit exponentials.
oracle::M product_oracle(const AnsatzSpec &spec, const Eigen::VectorXd &row, int ell) {
  oracle::M u = spec.u0_matrix();
  for (int m = 0; m + 1 < ell; ++m)
    u = u * oracle::rotation(spec.generators[static_cast<std::size_t>(m)].str(),
                             row(spec.column_of[static_cast<std::size_t>(m)]));
  return u;
}

}  // namespace

TEST(Builtin, ParameterCounts) {
  EXPECT_EQ(builtin_ansatz("lowenergy36").n_params(), 36);
  EXPECT_EQ(builtin_ansatz("spinchain140").n_params(), 140);
  EXPECT_EQ(builtin_ansatz("universal2q15").n_params(), 15);
  EXPECT_EQ(builtin_ansatz("universal2q15_euler").n_params(), 15);
  EXPECT_EQ(builtin_ansatz("lowenergy36_xyz").n_params(), 36);
  EXPECT_EQ(builtin_ansatz("lowenergy36").n_qubits, 3);
  EXPECT_EQ(builtin_ansatz("spinchain140").n_qubits, 4);
}

TEST(Builtin, UnknownNameRejected) {
  try {
    builtin_ansatz("nope");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownName);
  }
}

TEST(Builtin, TiedMembersCommute) {
  for (const char *name : {"lowenergy36", "lowenergy36_xyz", "spinchain140", "universal2q15", "universal2q15_euler"}) {
    const AnsatzSpec s = builtin_ansatz(name);
    for (const auto &g : s.ties())
      for (int a : g)
        for (int b : g) EXPECT_TRUE(commutes(s.generators[a], s.generators[b])) << name;
  }
}

TEST(Unitary, MatchesExplicitProduct) {
  std::mt19937_64 rng(11);
  for (const char *name : {"lowenergy36", "universal2q15"}) {
    const AnsatzSpec s = builtin_ansatz(name);
    const Eigen::VectorXd row = random_row(s.n_params(), rng);
    for (int ell : {1, 2, s.n_members() / 2, s.n_members() + 1}) {
      const oracle::M expected = product_oracle(s, row, ell);
      EXPECT_LT(oracle::max_abs(partial_unitary(s, row, ell).to_matrix() - expected), 1e-10) << name << " " << ell;
      EXPECT_LT(oracle::max_abs(partial_unitary_matrix(s, row, ell) - expected), 1e-10);
    }
  }
}

TEST(Unitary, ZeroRowIsU0) {
  AnsatzSpec s = builtin_ansatz("universal2q15");
  s.u0.add(Gate::h(0));
  const Eigen::VectorXd row = Eigen::VectorXd::Zero(s.n_params());
  EXPECT_LT(oracle::max_abs(full_unitary(s, row).to_matrix() - s.u0.to_matrix()), 1e-12);
}

TEST(Unitary, DenseU0HasNoCircuit) {
  AnsatzSpec s = builtin_ansatz("universal2q15");
  s.u0_dense = DenseOp::Identity(4, 4);
  const Eigen::VectorXd row = Eigen::VectorXd::Zero(s.n_params());
  try {
    partial_unitary(s, row, 1);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonCircuitU0);
  }
  EXPECT_LT(oracle::max_abs(full_unitary_matrix(s, row) - DenseOp::Identity(4, 4)), 1e-12);
}

TEST(Unitary, RowLengthChecked) {
  const AnsatzSpec s = builtin_ansatz("universal2q15");
  EXPECT_THROW(full_unitary(s, Eigen::VectorXd::Zero(3)), Error);
  EXPECT_THROW(partial_unitary(s, Eigen::VectorXd::Zero(15), 0), Error);
  EXPECT_THROW(partial_unitary(s, Eigen::VectorXd::Zero(15), 17), Error);
}

TEST(RotatedGenerator, EqualsConjugatedString) {
  std::mt19937_64 rng(5);
  const AnsatzSpec s = builtin_ansatz("lowenergy36");
  const Eigen::VectorXd row = random_row(s.n_params(), rng);
  for (int ell : {1, 7, 30, 54}) {
    const oracle::M u = product_oracle(s, row, ell);
    const oracle::M expected = u * oracle::pauli(s.generators[static_cast<std::size_t>(ell - 1)].str()) * u.adjoint();
    const PauliSum o = rotated_generator(s, row, ell);
    EXPECT_TRUE(o.is_hermitian());
    EXPECT_LT(oracle::max_abs(to_dense(o) - expected), 1e-10);
  }
}

TEST(SwapSymmetry, FullUnitaryCommutesWithSwap) {
  std::mt19937_64 rng(8);
  const DenseOp sw = AnsatzSpec::swap_matrix(3, 0, 1);
  for (const char *name : {"lowenergy36", "lowenergy36_xyz"}) {
    const AnsatzSpec s = builtin_ansatz(name);
    ASSERT_TRUE(s.swap_symmetry.has_value());
    const DenseOp u = full_unitary_matrix(s, random_row(s.n_params(), rng));
    EXPECT_LT(oracle::max_abs(sw * u - u * sw), 1e-10) << name;
  }
}

TEST(SwapSymmetry, SwapMatrixExchangesLetters) {
  const DenseOp sw = AnsatzSpec::swap_matrix(3, 0, 2);
  EXPECT_LT(oracle::max_abs(sw * oracle::pauli("XYZ") * sw - oracle::pauli("ZYX")), 1e-12);
}

TEST(Validate, RejectsNonCommutingTie) {
  AnsatzSpec s;
  s.n_qubits = 2;
  s.u0 = Circuit(2);
  s.generators = {PauliString::from_letters("XI"), PauliString::from_letters("ZI")};
  s.column_of = {0, 0};
  EXPECT_THROW(s.validate(), Error);
  s.column_of = {0, 1};
  EXPECT_NO_THROW(s.validate());
}

TEST(Validate, RejectsWideGenerators) {
  AnsatzSpec s;
  s.n_qubits = 3;
  s.u0 = Circuit(3);
  s.generators = {PauliString::from_letters("XXX")};
  s.column_of = {0};
  EXPECT_THROW(s.validate(), Error);
}

TEST(Validate, RejectsBrokenSwap) {
  AnsatzSpec s;
  s.n_qubits = 2;
  s.u0 = Circuit(2);
  s.generators = {PauliString::from_letters("XI")};
  s.column_of = {0};
  s.swap_symmetry = std::make_pair(0, 1);
  EXPECT_THROW(s.validate(), Error);
}

TEST(Json, RoundTripBuiltin) {
  for (const char *name : {"lowenergy36", "spinchain140", "universal2q15"}) {
    AnsatzSpec s = builtin_ansatz(name);
    s.u0.add(Gate::rx(0, 0.3));
    const AnsatzSpec back = ansatz_from_json(ansatz_to_json(s));
    EXPECT_EQ(back.n_qubits, s.n_qubits);
    EXPECT_EQ(back.generators, s.generators);
    EXPECT_EQ(back.column_of, s.column_of);
    EXPECT_EQ(back.swap_symmetry, s.swap_symmetry);
    EXPECT_LT(oracle::max_abs(back.u0.to_matrix() - s.u0.to_matrix()), 1e-15);
  }
}

TEST(Json, InlineSpecWithTies) {
  const auto j = nlohmann::json::parse(R"({"n_qubits": 2, "generators": ["XI", "IX", "ZZ"], "ties": [[0, 1]]})");
  const AnsatzSpec s = ansatz_from_json(j);
  EXPECT_EQ(s.n_params(), 2);
  EXPECT_EQ(s.column_of, (std::vector<int>{0, 0, 1}));
}

TEST(Json, UnknownFieldRejected) {
  const auto j = nlohmann::json::parse(R"({"n_qubits": 2, "generators": ["XI"], "depth": 3})");
  try {
    ansatz_from_json(j);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
  }
}

TEST(Json, MissingFieldIsConfigError) {
  try {
    ansatz_from_json(nlohmann::json::parse(R"({"generators": ["XI"]})"));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
  }
}

TEST(ParamTable, RowZeroAndStep) {
  const ParamTable p(10, 4, 2.0);
  EXPECT_EQ(p.steps(), 10);
  EXPECT_DOUBLE_EQ(p.delta_mu, 0.2);
  EXPECT_EQ(p.row(0).norm(), 0.0);
  EXPECT_THROW(ParamTable(0, 4, 1.0), Error);
}
