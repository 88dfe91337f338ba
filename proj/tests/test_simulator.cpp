#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "oracle_helpers.hpp"
#include "vagt/simulator.hpp"

using namespace vagt;

namespace {

PauliString random_string(int n, std::mt19937_64 &rng) {
  std::uniform_int_distribution<std::uint64_t> d(0, (std::uint64_t{1} << (2 * n)) - 1);
  return PauliString(n, d(rng));
}

// A product of random Pauli rotations, mixing odd and even Y parity.
Circuit random_circuit(int n, int depth, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> angle(-1.5, 1.5);
  Circuit c(n);
  for (int i = 0; i < depth; ++i) {
    PauliString p = random_string(n, rng);
    if (p.is_identity()) p = PauliString::single(n, 0, Letter::Y);
    c.add(Gate::pauli_rotation(p, angle(rng)));
  }
  return c;
}

oracle::M circuit_oracle(const Circuit &c) {
  oracle::M u = oracle::M::Identity(1 << c.n_qubits(), 1 << c.n_qubits());
  for (const Gate &g : c.gates()) u = oracle::rotation(g.pauli.str(), g.theta) * u;
  return u;
}

oracle::M comm(const oracle::M &a, const oracle::M &b) { return a * b - b * a; }

}  // namespace

TEST(PreparePhi, BellPair) {
  const StateVector s = prepare_phi(1);
  EXPECT_NEAR(std::abs(s.amplitudes()(0) - 1 / std::numbers::sqrt2), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s.amplitudes()(3) - 1 / std::numbers::sqrt2), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s.amplitudes()(1)) + std::abs(s.amplitudes()(2)), 0.0, 1e-15);
}

TEST(PreparePhi, TwoPairs) {
  const StateVector s = prepare_phi(2);
  for (int i = 0; i < 16; ++i) {
    const double expect = (i == 0b0000 || i == 0b0101 || i == 0b1010 || i == 0b1111) ? 0.5 : 0.0;
    EXPECT_NEAR(std::abs(s.amplitudes()(i) - expect), 0.0, 1e-15) << i;
  }
}

TEST(PreparePhi, StringTimesTransposeHasUnitExpectation) {
  const StateVector s = prepare_phi(2);
  for (std::uint64_t code = 0; code < 16; ++code) {
    const PauliString p(2, code);
    PauliSum obs(4);
    obs.add(PauliString(4, (code << 4) | code), static_cast<double>(transpose_parity(p)));
    EXPECT_NEAR(expectation(s, obs), 1.0, 1e-12) << p.str();
  }
}

TEST(PreparePhi, TraceIdentity) {
  std::mt19937_64 rng(21);
  for (int n = 1; n <= 2; ++n) {
    const int d = 1 << n;
    const StateVector phi = prepare_phi(n);
    for (int trial = 0; trial < 10; ++trial) {
      const oracle::M a = oracle::random_hermitian(d, rng), b = oracle::random_hermitian(d, rng);
      const Eigen::VectorXcd v = phi.amplitudes();
      const oracle::C lhs = static_cast<double>(d) * v.dot(oracle::kron2(a.transpose(), b) * v);
      EXPECT_NEAR(std::abs(lhs - (a * b).trace()), 0.0, 1e-10);
    }
  }
}

TEST(Expectation, Examples) {
  EXPECT_NEAR(expectation(StateVector(1), PauliSum::parse("1.0*Z")), 1.0, 1e-15);
  EXPECT_NEAR(expectation(prepare_phi(1), PauliSum::parse("1.0*XX")), 1.0, 1e-15);
  std::mt19937_64 rng(8);
  const Eigen::VectorXcd psi = oracle::random_state(8, rng);
  const oracle::M h = oracle::random_hermitian(8, rng);
  const PauliSum obs = decompose(h);
  EXPECT_NEAR(expectation(StateVector(3, psi), obs), psi.dot(h * psi).real(), 1e-12);
  EXPECT_THROW(expectation(StateVector(2), obs), Error);
}

TEST(Gates, SingleQubitMatrices) {
  const double t = 0.731;
  const struct {
    Gate g;
    oracle::M m;
  } cases[] = {
      {Gate::rx(0, t), oracle::rotation("X", t / 2)},
      {Gate::ry(0, t), oracle::rotation("Y", t / 2)},
      {Gate::rz(0, t), oracle::rotation("Z", t / 2)},
      {Gate::h(0), (oracle::pauli("X") + oracle::pauli("Z")) / std::numbers::sqrt2},
  };
  for (const auto &c : cases) {
    Circuit circ(1);
    circ.add(c.g);
    EXPECT_LT(oracle::max_abs(circ.to_matrix() - c.m), 1e-14);
  }
}

TEST(Gates, MultiQubitOrdering) {
  Circuit c(2);
  c.add(Gate::cnot(0, 1));
  oracle::M cx = oracle::M::Zero(4, 4);
  cx(0, 0) = cx(1, 1) = cx(2, 3) = cx(3, 2) = 1;
  EXPECT_LT(oracle::max_abs(c.to_matrix() - cx), 1e-15);

  Circuit r(3);
  r.add(Gate::pauli_rotation(PauliString::from_letters("XY"), 0.4, {2, 0}));
  EXPECT_LT(oracle::max_abs(r.to_matrix() - oracle::rotation("YIX", 0.4)), 1e-13);

  std::mt19937_64 rng(5);
  const oracle::M h = oracle::random_hermitian(8, rng);
  const oracle::M u = oracle::expm_series(oracle::C(0, -1) * h);
  Circuit w(4);
  w.add(Gate::unitary(u, {3, 0, 2}));
  // targets (3,0,2) map to local bits (2,1,0); build the oracle by permutation
  oracle::M expect = oracle::M::Zero(16, 16);
  for (int col = 0; col < 16; ++col)
    for (int row = 0; row < 16; ++row) {
      const int q1r = (row >> 2) & 1, q1c = (col >> 2) & 1;
      if (q1r != q1c) continue;
      auto local = [](int idx) { return (((idx >> 0) & 1) << 2) | (((idx >> 3) & 1) << 1) | ((idx >> 1) & 1); };
      expect(row, col) = u(local(row), local(col));
    }
  EXPECT_LT(oracle::max_abs(w.to_matrix() - expect), 1e-13);
}

TEST(Gates, ControlledPauli) {
  Circuit c(2);
  Gate g = Gate::pauli_string(PauliString::from_letters("Y"), {1}, oracle::C(0, 1));
  g.controls = {0};
  c.add(g);
  oracle::M expect = oracle::M::Identity(4, 4);
  expect.block(2, 2, 2, 2) = oracle::C(0, 1) * oracle::pauli("Y");
  EXPECT_LT(oracle::max_abs(c.to_matrix() - expect), 1e-15);
}

TEST(Circuit, InverseTransposeReverse) {
  std::mt19937_64 rng(33);
  const Circuit c = random_circuit(3, 8, rng);
  const oracle::M u = circuit_oracle(c);
  EXPECT_LT(oracle::max_abs(c.to_matrix() - u), 1e-12);
  EXPECT_LT(oracle::max_abs(c.inverse().to_matrix() - u.adjoint()), 1e-12);
  EXPECT_LT(oracle::max_abs(c.transpose().to_matrix() - u.transpose()), 1e-12);
  Circuit h(2);
  h.add(Gate::h(0)).add(Gate::ry(1, 0.3)).add(Gate::cnot(0, 1)).add(Gate::rx(0, 0.2)).add(Gate::rz(1, -0.9));
  EXPECT_LT(oracle::max_abs(h.transpose().to_matrix() - h.to_matrix().transpose()), 1e-14);
  EXPECT_LT(oracle::max_abs(h.inverse().to_matrix() - h.to_matrix().adjoint()), 1e-14);
  EXPECT_THROW(Circuit(2).add(Gate::h(2)), Error);
}

TEST(StateVector, NormPreservedGateByGate) {
  std::mt19937_64 rng(44);
  const Circuit c = random_circuit(4, 30, rng);
  StateVector s(4, oracle::random_state(16, rng));
  for (const Gate &g : c.gates()) {
    s.apply(g);
    EXPECT_LT(std::abs(s.norm() - 1.0), 1e-10);
  }
}

TEST(Sample, ZeroStateAlwaysZero) {
  const auto counts = sample(Circuit(2), {1, 500}, {0, 1});
  ASSERT_EQ(counts.size(), 1u);
  EXPECT_EQ(counts.at(0), 500u);
}

TEST(Sample, BellFrequencyAndDeterminism) {
  Circuit c(2);
  c.add(Gate::h(0)).add(Gate::cnot(0, 1));
  const ShotSampler sampler{12345, 1000000};
  const auto counts = sample(c, sampler, {0});
  EXPECT_NEAR(static_cast<double>(counts.at(0)) / 1e6, 0.5, 0.002);
  EXPECT_EQ(counts, sample(c, sampler, {0}));
  const auto both = sample(c, {99, 1000}, {0, 1});
  EXPECT_EQ(both.count(1) + both.count(2), 0u);
}

TEST(HadamardTestB, CommutingCaseGivesHalf) {
  const Circuit id(2);
  const PauliString b = PauliString::from_letters("ZI");
  const HadamardOutcome r = hadamard_test_b(id, b, PauliString::from_letters("XY"), b);
  EXPECT_NEAR(r.value, 0.0, 1e-14);
  EXPECT_NEAR(r.p0, 0.5, 1e-14);
}

TEST(HadamardTestB, MatchesDenseTrace) {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 40; ++trial) {
    const Circuit u = random_circuit(2, 5, rng);
    const PauliString b = random_string(2, rng), sj = random_string(2, rng), sk = random_string(2, rng);
    const oracle::M um = circuit_oracle(u);
    const oracle::M w = um * oracle::pauli(b.str()) * um.adjoint();
    const oracle::C expect = (oracle::pauli(sj.str()).transpose() * oracle::C(0, 1) * comm(w, oracle::pauli(sk.str()))).trace() / 4.0;
    const HadamardOutcome r = hadamard_test_b(u, b, sj, sk);
    EXPECT_NEAR(r.value, expect.real(), 1e-10);
    EXPECT_NEAR(r.p0, 0.5 - expect.real() / 4, 1e-10);
  }
}

TEST(HadamardTestB, ValueTwoMeansZeroProbability) {
  // i[Z, X] = -2Y, and <phi|Y (x) Y|phi> = -1
  const Circuit id(1);
  const PauliString x = PauliString::from_letters("X"), y = PauliString::from_letters("Y"), z = PauliString::from_letters("Z");
  const HadamardOutcome r = hadamard_test_b(id, z, y, x);
  EXPECT_NEAR(r.value, 2.0, 1e-14);
  EXPECT_NEAR(r.p0, 0.0, 1e-14);
}

TEST(HadamardTestX, MatchesDenseTrace) {
  std::mt19937_64 rng(66);
  for (int trial = 0; trial < 40; ++trial) {
    const Circuit ua = random_circuit(2, 4, rng), ub = random_circuit(2, 6, rng);
    const PauliString ba = random_string(2, rng), bb = random_string(2, rng);
    const PauliString sj = random_string(2, rng), sk = random_string(2, rng);
    const oracle::M ma = circuit_oracle(ua), mb = circuit_oracle(ub);
    const oracle::M v = ma.transpose();
    const oracle::M left = oracle::C(0, 1) * comm(v.adjoint() * oracle::pauli(ba.str()) * v, oracle::pauli(sj.str()));
    const oracle::M right = oracle::C(0, 1) * comm(mb * oracle::pauli(bb.str()) * mb.adjoint(), oracle::pauli(sk.str()));
    const oracle::C expect = (left.transpose() * right).trace() / 4.0;
    const HadamardOutcome r = hadamard_test_x(ua, ba, ub, bb, sj, sk);
    EXPECT_NEAR(r.value, expect.real(), 1e-10);
    EXPECT_NEAR(r.p0, 0.5 + expect.real() / 8, 1e-10);
  }
}

TEST(HadamardTestX, VanishingCommutatorsAndExtremeValue) {
  const Circuit id(1);
  const PauliString x = PauliString::from_letters("X"), z = PauliString::from_letters("Z");
  const HadamardOutcome zero = hadamard_test_x(id, z, id, z, z, z);
  EXPECT_NEAR(zero.value, 0.0, 1e-14);
  EXPECT_NEAR(zero.p0, 0.5, 1e-14);
  // i[Z, X] = -2Y on both sides: <phi| (-2Y) (x) (-2Y) |phi> = 4 <phi|YY|phi> = -4
  const HadamardOutcome low = hadamard_test_x(id, z, id, z, x, x);
  EXPECT_NEAR(low.value, -4.0, 1e-14);
  EXPECT_NEAR(low.p0, 0.0, 1e-14);
}

TEST(HadamardTestX, SymmetricShortcut) {
  Circuit even(2);
  even.add(Gate::pauli_rotation(PauliString::from_letters("YY"), 0.3));
  even.add(Gate::pauli_rotation(PauliString::from_letters("XI"), -0.8));
  const PauliString b = PauliString::from_letters("ZX"), sj = PauliString::from_letters("XZ"), sk = PauliString::from_letters("YX");
  const double full = hadamard_test_x(even, b, even, b, sj, sk).value;
  const double fast = hadamard_test_x(even, b, even, b, sj, sk, std::nullopt, {true}).value;
  EXPECT_NEAR(full, fast, 1e-12);
  Circuit odd(2);
  odd.add(Gate::pauli_rotation(PauliString::from_letters("YI"), 0.3));
  try {
    hadamard_test_x(odd, b, odd, b, sj, sk, std::nullopt, {true});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::AsymmetricGenerator);
  }
}

TEST(RyTest, MatchesDenseExpectation) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const Circuit u = random_circuit(2, 5, rng);
    const PauliString b = random_string(2, rng), sh = random_string(2, rng);
    const oracle::M um = circuit_oracle(u);
    const oracle::M w = um * oracle::pauli(b.str()) * um.adjoint();
    const double expect = (oracle::pauli(sh.str()).transpose() * w).trace().real() / 4.0;
    const HadamardOutcome r = ry_test(u, b, sh);
    EXPECT_NEAR(r.value, expect, 1e-10);
    EXPECT_NEAR(r.p0, 0.5 + expect / 2, 1e-10);
  }
}

TEST(ShotMode, ErrorScalesAsInverseSqrtShots) {
  std::mt19937_64 rng(88);
  const Circuit u = random_circuit(2, 5, rng);
  PauliString b = PauliString::from_letters("XY"), sj = PauliString::from_letters("ZX"), sk = PauliString::from_letters("YZ");
  const double exact = hadamard_test_b(u, b, sj, sk).value;
  std::vector<double> logs, loge;
  for (std::uint64_t shots : {100ULL, 10000ULL, 1000000ULL}) {
    double mse = 0.0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
      const double v = hadamard_test_b(u, b, sj, sk, ShotSampler{derive_seed(1, {shots, static_cast<std::uint64_t>(r)}), shots}).value;
      mse += (v - exact) * (v - exact);
    }
    logs.push_back(std::log(static_cast<double>(shots)));
    loge.push_back(0.5 * std::log(mse / reps));
  }
  const double slope = (loge[2] - loge[0]) / (logs[2] - logs[0]);
  EXPECT_NEAR(slope, -0.5, 0.2);
}
