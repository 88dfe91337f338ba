#include <gtest/gtest.h>

#include "oracle_helpers.hpp"
#include "vagt/effective.hpp"

using namespace vagt;

namespace {

VagtResult lowenergy_run(int steps) {
  VagtConfig c;
  c.pair = model_low_energy(-5.0, 1.0);
  c.spec = builtin_ansatz("lowenergy36");
  c.steps = steps;
  c.lambda = 1.0;
  return run(c);
}

// A result whose U is supplied directly, with H~ = U^dag H U.
VagtResult with_unitary(const HamiltonianPair &pair, const DenseOp &u) {
  VagtResult r;
  r.pair = pair;
  r.spec.n_qubits = pair.n_qubits;
  r.spec.u0 = Circuit(pair.n_qubits);
  r.unitary = u;
  r.htilde_dense = rotate_hamiltonian(pair.dense(pair.lambda), u);
  r.htilde = decompose(r.htilde_dense);
  r.circuit = Circuit(pair.n_qubits);
  return r;
}

}  // namespace

TEST(Projector, Identities) {
  const LowEnergyProjector p(3, {0, 1}, {0});
  const DenseOp d = p.dense();
  const DenseOp q = DenseOp::Identity(8, 8) - d;
  EXPECT_LT(oracle::max_abs(d * d - d), 1e-12);
  EXPECT_LT(oracle::max_abs(d - d.adjoint()), 1e-12);
  EXPECT_LT(oracle::max_abs(d * q), 1e-12);
  EXPECT_NEAR(d.trace().real(), 4.0, 1e-12);
  EXPECT_LT(oracle::max_abs(d - oracle::kron2(oracle::M::Identity(4, 4), (oracle::single('I') + oracle::single('Z')) / 2.0)),
            1e-12);
}

TEST(Projector, PinnedMiddleQubit) {
  const LowEnergyProjector p(3, {2, 0}, {1});
  EXPECT_EQ(p.effective(), (std::vector<int>{0, 2}));
  EXPECT_EQ(p.embed(0), 2u);
  EXPECT_EQ(p.embed(3), 7u);
  EXPECT_THROW(LowEnergyProjector(3, {0, 0}, {0, 0}), Error);
  EXPECT_THROW(LowEnergyProjector(3, {0, 1}, {}), Error);
}

TEST(Heff, PinnedExpectation) {
  const auto pair = model_custom("1.0*IIZ", "1.0*XII", 0.0);
  const auto r = with_unitary(pair, DenseOp::Identity(8, 8));
  const LowEnergyProjector p(3, {0, 1}, {0});
  for (StrategyMode m : {StrategyMode::Analytic, StrategyMode::CircuitExact}) {
    EstimatorStrategy s;
    s.mode = m;
    const auto h = extract_heff(r, p, s);
    EXPECT_NEAR(h.terms.coefficient(PauliString(2, 0)).real(), 1.0, 1e-12);
    double others = 0.0;
    for (const auto &[code, c] : h.terms.terms())
      if (code != 0) others += std::abs(c);
    EXPECT_LT(others, 1e-12);
  }
}

TEST(Heff, ReconstructsProjectedBlock) {
  const auto r = lowenergy_run(10);
  const LowEnergyProjector p(3, {0, 1}, {0});
  const auto h = extract_heff(r, p);
  EXPECT_TRUE(h.terms.is_hermitian());
  EXPECT_LT(oracle::max_abs(h.dense() - p.restrict(r.htilde_dense)), 1e-9);
}

TEST(Heff, CircuitMatchesAnalytic) {
  const auto r = lowenergy_run(6);
  const LowEnergyProjector p(3, {0, 1}, {0});
  EstimatorStrategy s;
  s.mode = StrategyMode::CircuitExact;
  const auto a = extract_heff(r, p);
  const auto c = extract_heff(r, p, s);
  EXPECT_TRUE(a.terms.approx_equal(c.terms, 1e-8));
}

TEST(Heff, ShotsScatterAroundExact) {
  const auto r = lowenergy_run(4);
  const LowEnergyProjector p(3, {0, 1}, {0});
  EstimatorStrategy s;
  s.mode = StrategyMode::CircuitShots;
  s.shots = 20000;
  s.seed = 3;
  const auto a = extract_heff(r, p);
  const auto b = extract_heff(r, p, s);
  EXPECT_TRUE(a.terms.approx_equal(b.terms, 0.2));
  EXPECT_FALSE(a.terms.approx_equal(b.terms, 1e-6));
}

TEST(Heff, Linearity) {
  auto r = lowenergy_run(3);
  const LowEnergyProjector p(3, {0, 1}, {0});
  const auto a = extract_heff(r, p);
  r.htilde_dense *= 2.5;
  const auto b = extract_heff(r, p);
  EXPECT_TRUE((a.terms * cplx(2.5, 0.0)).approx_equal(b.terms, 1e-12));
}

TEST(Heff, RejectsOperatorOnPinnedQubit) {
  const auto r = lowenergy_run(2);
  const LowEnergyProjector p(3, {0, 1}, {0});
  try {
    extract_heff(r, p, {PauliString::from_letters("XIZ")});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadEffectiveOperator);
  }
  const auto ok = extract_heff(r, p, {PauliString::from_letters("XYI")});
  EXPECT_EQ(ok.n_effective(), 2);
}

TEST(Fidelity, StartsAtOneAndStaysInRange) {
  const auto r = lowenergy_run(10);
  const LowEnergyProjector p(3, {0, 1}, {0});
  const auto h = extract_heff(r, p);
  const auto f = fidelities(r.pair, h, p, random_states(2, 5, 1), {0.0, 0.5, 3.0, 20.0});
  for (Eigen::Index i = 0; i < 5; ++i) {
    EXPECT_NEAR(f.f1(i, 0), 1.0, 1e-12);
    EXPECT_NEAR(f.f2(i, 0), 1.0, 1e-12);
  }
  EXPECT_GE(f.f1.minCoeff(), -1e-10);
  EXPECT_LE(f.f1.maxCoeff(), 1.0 + 1e-10);
  EXPECT_GE(f.f2.minCoeff(), -1e-10);
  EXPECT_LE(f.f2.maxCoeff(), 1.0 + 1e-10);
  EXPECT_LE(f.f1_stats.lo(3), f.f1_stats.mean(3));
}

TEST(Fidelity, ExactEffectiveTheory) {
  // H = A (x) 1 + 3 Z on the pinned qubit: the pinned qubit never moves.
  const auto pair = model_custom("0.7*XYI + 0.4*ZII + 1.1*IXI + 3.0*IIZ", "0", 0.0);
  const auto r = with_unitary(pair, DenseOp::Identity(8, 8));
  const LowEnergyProjector p(3, {0, 1}, {0});
  const auto f = fidelities(pair, extract_heff(r, p), p, random_states(2, 4, 9), log_times(1.0, 1000.0, 12));
  EXPECT_GT(f.f1.minCoeff(), 1.0 - 1e-9);
  EXPECT_LT(f.f2.minCoeff(), 0.99);
}

TEST(DirectRotation, CarriesTheLowSpectrum) {
  const auto pair = model_low_energy(-5.0, 1.0);
  const LowEnergyProjector p(3, {0, 1}, {0});
  const auto h = direct_rotation_heff(pair, p);
  EXPECT_TRUE(is_hermitian(h.dense(), 1e-12));
  const Eigen::VectorXd got = eigenvalues(h.dense());
  const Eigen::VectorXd want = eigenvalues(pair.dense(1.0)).head(4);
  EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-10);
  const auto flat = direct_rotation_heff(model_low_energy(-5.0, 0.0), p);
  EXPECT_LT(oracle::max_abs(flat.dense() + 5.0 * DenseOp::Identity(4, 4)), 1e-12);
}

TEST(DirectRotation, ExactForDecoupledPinnedQubit) {
  const auto pair = model_custom("0.7*XYI + 0.4*ZII + 1.1*IXI + 3.0*IIZ", "0", 0.0);
  const LowEnergyProjector p(3, {0, 1}, {1});
  const auto h = direct_rotation_heff(pair, p);
  const DenseOp want = to_dense(PauliSum::parse("0.7*XY + 0.4*ZI + 1.1*IX")) - 3.0 * DenseOp::Identity(4, 4);
  EXPECT_LT(oracle::max_abs(h.dense() - want), 1e-10);
}

TEST(States, SeededAndNormalized) {
  const auto a = random_states(2, 3, 5), b = random_states(2, 3, 5);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(a[static_cast<std::size_t>(i)].norm(), 1.0, 1e-12);
    EXPECT_EQ(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(i)]);
  }
  EXPECT_NE(a[0], a[1]);
}

TEST(Times, Grids) {
  const auto l = log_times(1.0, 1000.0, 4);
  EXPECT_NEAR(l[1], 10.0, 1e-12);
  EXPECT_NEAR(l[3], 1000.0, 1e-9);
  const auto t = linear_times(0.0, 10.0, 101);
  EXPECT_NEAR(t[37], 3.7, 1e-12);
}

TEST(Stats, MeanAndInterval) {
  Eigen::MatrixXd s(4, 1);
  s << 1.0, 2.0, 3.0, 4.0;
  const auto st = column_stats(s);
  EXPECT_NEAR(st.mean(0), 2.5, 1e-12);
  EXPECT_NEAR(st.hi(0) - st.mean(0), 1.96 * std::sqrt(5.0 / 3.0 / 4.0), 1e-12);
}

TEST(Correlation, ExactUnitaryReproducesExactSeries) {
  const auto pair = model_random_2q(11, 1.0);
  const EigenSystem es = eig(pair.dense());
  // Send |11>, the H0 ground state, to the exact ground state.
  DenseOp u(4, 4);
  u.col(3) = es.vectors.col(0);
  u.col(0) = es.vectors.col(1);
  u.col(1) = es.vectors.col(2);
  u.col(2) = es.vectors.col(3);
  const auto r = with_unitary(pair, u);
  const auto times = linear_times(0.0, 10.0, 41);
  for (char axis : {'x', 'z'}) {
    const auto c = correlation(r, axis, times);
    const auto d = correlation(r, axis, times, {0, true});
    const auto e = exact_correlation(pair, axis, times);
    EXPECT_EQ(c.ground_index, 3);
    EXPECT_NEAR(c.values[0], 1.0, 1e-12);
    for (std::size_t i = 0; i < times.size(); ++i) {
      EXPECT_NEAR(c.values[i], e.values[i], 1e-10);
      EXPECT_NEAR(d.values[i], e.values[i], 1e-10);
      EXPECT_LE(std::abs(c.values[i]), 1.0 + 1e-12);
    }
  }
  EXPECT_THROW(correlation(r, 'q', times), Error);
}
