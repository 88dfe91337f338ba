#include <gtest/gtest.h>

#include <random>

#include "oracle_helpers.hpp"
#include "vagt/pauli.hpp"

using namespace vagt;

namespace {

PauliSum random_sum(int n, std::mt19937_64 &rng, bool hermitian) {
  std::normal_distribution<double> g;
  PauliSum s(n);
  const std::uint64_t count = std::uint64_t{1} << (2 * n);
  for (std::uint64_t code = 0; code < count; ++code)
    s.add(PauliString(n, code), hermitian ? cplx(g(rng), 0) : cplx(g(rng), g(rng)));
  return s;
}

}  // namespace

TEST(PauliString, EncodeDecodeRoundTrip) {
  for (int n = 1; n <= 3; ++n) {
    const std::uint64_t count = std::uint64_t{1} << (2 * n);
    for (std::uint64_t code = 0; code < count; ++code) {
      const PauliString p(n, code);
      EXPECT_EQ(PauliString::from_letters(p.str()), p);
      EXPECT_EQ(p.str(), oracle::letters_of(code, n));
    }
  }
}

TEST(PauliString, QubitZeroIsLeftmostFactor) {
  const PauliString p = PauliString::from_letters("XIZ");
  EXPECT_EQ(p.letter(0), Letter::X);
  EXPECT_EQ(p.letter(2), Letter::Z);
  EXPECT_EQ(p.x_mask(), 0b100u);
  EXPECT_EQ(p.z_mask(), 0b001u);
  EXPECT_EQ(PauliString::single(3, 1, Letter::Y).str(), "IYI");
}

TEST(PauliString, RejectsBadInput) {
  EXPECT_THROW(PauliString::from_letters("XA"), Error);
  EXPECT_THROW(PauliString(2, 16), Error);
  EXPECT_THROW(PauliString::from_letters("X").letter(1), Error);
}

TEST(PauliString, DenseMatchesKroneckerProducts) {
  for (int n = 1; n <= 3; ++n) {
    const std::uint64_t count = std::uint64_t{1} << (2 * n);
    for (std::uint64_t code = 0; code < count; ++code) {
      const PauliString p(n, code);
      EXPECT_LT(oracle::max_abs(to_dense(p) - oracle::pauli(p.str())), 1e-15) << p.str();
    }
  }
}

TEST(PauliString, ProductsMatchDense) {
  for (int n = 1; n <= 2; ++n) {
    const std::uint64_t count = std::uint64_t{1} << (2 * n);
    for (std::uint64_t a = 0; a < count; ++a)
      for (std::uint64_t b = 0; b < count; ++b) {
        const PauliString pa(n, a), pb(n, b);
        const PauliProduct prod = multiply(pa, pb);
        const oracle::M expect = oracle::pauli(pa.str()) * oracle::pauli(pb.str());
        EXPECT_LT(oracle::max_abs(prod.phase * oracle::pauli(prod.string.str()) - expect), 1e-15);
      }
  }
}

TEST(Commutator, SingleQubitAlgebra) {
  const Commutator c = commutator(PauliString::from_letters("X"), PauliString::from_letters("Y"));
  ASSERT_TRUE(c.result.has_value());
  EXPECT_EQ(c.result->str(), "Z");
  EXPECT_NEAR(std::abs(c.coefficient - cplx(0, 2)), 0.0, 1e-15);
}

TEST(Commutator, DisjointSupportCommutes) {
  const Commutator c = commutator(PauliString::from_letters("XI"), PauliString::from_letters("IZ"));
  EXPECT_FALSE(c.result.has_value());
  EXPECT_EQ(c.coefficient, cplx(0, 0));
}

TEST(Commutator, XZWithYIMatchesDense) {
  const PauliString a = PauliString::from_letters("XZ"), b = PauliString::from_letters("YI");
  const Commutator c = commutator(a, b);
  ASSERT_TRUE(c.result.has_value());
  EXPECT_EQ(c.result->str(), "ZZ");
  EXPECT_NEAR(std::abs(c.coefficient - cplx(0, 2)), 0.0, 1e-15);
  const oracle::M dense = oracle::pauli("XZ") * oracle::pauli("YI") - oracle::pauli("YI") * oracle::pauli("XZ");
  EXPECT_LT(oracle::max_abs(c.coefficient * oracle::pauli("ZZ") - dense), 1e-14);
}

TEST(Commutator, AntiSymmetric) {
  const std::uint64_t count = 16;
  for (std::uint64_t a = 0; a < count; ++a)
    for (std::uint64_t b = 0; b < count; ++b) {
      const Commutator ab = commutator(PauliString(2, a), PauliString(2, b));
      const Commutator ba = commutator(PauliString(2, b), PauliString(2, a));
      ASSERT_EQ(ab.result.has_value(), ba.result.has_value());
      if (!ab.result) continue;
      EXPECT_EQ(*ab.result, *ba.result);
      EXPECT_EQ(ab.coefficient, -ba.coefficient);
    }
}

TEST(Commutator, SizeMismatchThrows) {
  try {
    commutator(PauliString::from_letters("X"), PauliString::from_letters("XX"));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::SizeMismatch);
  }
}

TEST(TransposeParity, Examples) {
  EXPECT_EQ(transpose_parity(PauliString::from_letters("Y")), -1);
  EXPECT_EQ(transpose_parity(PauliString::from_letters("XZ")), 1);
  EXPECT_EQ(transpose_parity(PauliString::from_letters("YY")), 1);
}

TEST(TransposeParity, MatchesDenseTranspose) {
  for (int n = 1; n <= 2; ++n) {
    const std::uint64_t count = std::uint64_t{1} << (2 * n);
    for (std::uint64_t code = 0; code < count; ++code) {
      const PauliString p(n, code);
      const oracle::M m = to_dense(p);
      EXPECT_LT(oracle::max_abs(static_cast<double>(transpose_parity(p)) * m - m.transpose()), 1e-15);
    }
  }
}

TEST(PauliSum, Orthogonality) {
  const int n = 3;
  const std::uint64_t count = 64;
  for (std::uint64_t a = 0; a < count; ++a)
    for (std::uint64_t b = 0; b < count; ++b) {
      const cplx tr = (to_dense(PauliString(n, a)) * to_dense(PauliString(n, b))).trace();
      EXPECT_NEAR(std::abs(tr - cplx(a == b ? 8.0 : 0.0, 0.0)), 0.0, 1e-12);
    }
}

TEST(Decompose, TwoZFields) {
  const oracle::M m = oracle::pauli("ZI") + oracle::pauli("IZ");
  const PauliSum s = decompose(m);
  EXPECT_EQ(s.size(), 2u);
  EXPECT_NEAR(s.coefficient(PauliString::from_letters("ZI")).real(), 1.0, 1e-15);
  EXPECT_NEAR(s.coefficient(PauliString::from_letters("IZ")).real(), 1.0, 1e-15);
}

TEST(Decompose, ZeroMatrixIsEmpty) {
  EXPECT_TRUE(decompose(oracle::M::Zero(4, 4)).empty());
}

TEST(Decompose, RandomHermitianRoundTrip) {
  std::mt19937_64 rng(7);
  for (int n = 1; n <= 4; ++n) {
    const oracle::M h = oracle::random_hermitian(1 << n, rng);
    const PauliSum s = decompose(h);
    EXPECT_TRUE(s.is_hermitian());
    EXPECT_LT(oracle::max_abs(to_dense(s) - h), 1e-12);
    oracle::M direct = oracle::M::Zero(1 << n, 1 << n);
    for (const auto &[p, c] : s.items()) direct += c * oracle::pauli(p.str());
    EXPECT_LT(oracle::max_abs(direct - h), 1e-12);
  }
}

TEST(Decompose, RandomSumRoundTrip) {
  std::mt19937_64 rng(11);
  for (int n = 1; n <= 3; ++n) {
    const PauliSum s = random_sum(n, rng, false);
    EXPECT_TRUE(decompose_operator(to_dense(s)).approx_equal(s, 1e-12));
    const PauliSum h = random_sum(n, rng, true);
    EXPECT_TRUE(decompose(to_dense(h)).approx_equal(h, 1e-12));
  }
}

TEST(Decompose, Errors) {
  oracle::M nh = oracle::pauli("X");
  nh(0, 1) = cplx(0, 1);
  try {
    decompose(nh);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonHermitian);
  }
  try {
    decompose(oracle::M::Identity(3, 3));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadDimension);
  }
}

TEST(PauliSum, SumCommutatorMatchesDense) {
  std::mt19937_64 rng(3);
  const PauliSum a = random_sum(2, rng, true), b = random_sum(2, rng, true);
  const oracle::M da = to_dense(a), db = to_dense(b);
  EXPECT_LT(oracle::max_abs(to_dense(commutator(a, b)) - (da * db - db * da)), 1e-12);
  EXPECT_LT(oracle::max_abs(to_dense(a * b) - da * db), 1e-12);
}

TEST(PauliSum, PrunesCancelledTerms) {
  PauliSum s(2);
  s.add(PauliString::from_letters("XX"), 1.0);
  s.add(PauliString::from_letters("XX"), -1.0);
  EXPECT_TRUE(s.empty());
}

TEST(PauliSum, TextRoundTrip) {
  const PauliSum s = PauliSum::parse("1.0*ZI + 1.0*IZ");
  EXPECT_EQ(s.n_qubits(), 2);
  EXPECT_EQ(s.str(), "1.0*IZ + 1.0*ZI");
  const PauliSum t = PauliSum::parse("-0.25*XY - 3e-2*YX + (0.5,-1.5)*ZZ + II");
  EXPECT_EQ(PauliSum::parse(t.str()).terms(), t.terms());
  EXPECT_EQ(t.coefficient(PauliString::from_letters("II")), cplx(1.0, 0.0));
  EXPECT_EQ(t.coefficient(PauliString::from_letters("YX")), cplx(-0.03, 0.0));

  std::mt19937_64 rng(5);
  const PauliSum r = random_sum(3, rng, false);
  EXPECT_EQ(PauliSum::parse(r.str()).terms(), r.terms());
  EXPECT_TRUE(PauliSum::parse("0", 2).empty());
}

TEST(PauliSum, ParseErrors) {
  EXPECT_THROW(PauliSum::parse(""), Error);
  EXPECT_THROW(PauliSum::parse("1.0*XI + 2.0*X"), Error);
  EXPECT_THROW(PauliSum::parse("1.0*"), Error);
  EXPECT_THROW(PauliSum::parse("1.0*XQ"), Error);
  EXPECT_THROW(PauliSum::parse("XI YI"), Error);
}

TEST(StructureTable, SingleQubitEntries) {
  const StructureTable t = build_structure_table(1);
  const auto &yz = t.entry(PauliString::from_letters("Y"), PauliString::from_letters("Z"));
  ASSERT_TRUE(yz.has_value());
  EXPECT_EQ(PauliString(1, yz->h).str(), "X");
  EXPECT_NEAR(std::abs(yz->coefficient - cplx(0, -2)), 0.0, 1e-15);
  EXPECT_FALSE(t.entry(PauliString::from_letters("X"), PauliString::from_letters("X")).has_value());
}

TEST(StructureTable, TwoQubitTableMatchesDense) {
  const StructureTable t = build_structure_table(2);
  for (std::uint64_t l = 0; l < 16; ++l)
    for (std::uint64_t j = 0; j < 16; ++j) {
      const oracle::M pl = oracle::pauli(oracle::letters_of(l, 2));
      const oracle::M pj = oracle::pauli(oracle::letters_of(j, 2));
      const oracle::M dense = pl.transpose() * pj - pj * pl.transpose();
      const auto &e = t.entry(l, j);
      oracle::M got = oracle::M::Zero(4, 4);
      if (e) {
        EXPECT_NEAR(e->coefficient.real(), 0.0, 1e-15);
        got = e->coefficient * oracle::pauli(oracle::letters_of(e->h, 2));
      }
      EXPECT_LT(oracle::max_abs(got - dense), 1e-12);
    }
}

TEST(StructureTable, TooLarge) {
  try {
    build_structure_table(5);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::TableTooLarge);
  }
}
