#pragma once

#include <Eigen/Dense>

#include <bit>
#include <charconv>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vagt/error.hpp"

namespace vagt {

using cplx = std::complex<double>;

/// Coefficients below this magnitude are dropped whenever a sum is built.
inline constexpr double kPruneTolerance = 1e-12;
inline constexpr int kMaxPauliQubits = 31;

enum class Letter : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

namespace detail {

inline constexpr std::uint64_t kEvenBits = 0x5555555555555555ULL;

// Bits 0,2,4,... of v packed into bits 0,1,2,...
inline std::uint64_t compact_even_bits(std::uint64_t v) {
  v &= kEvenBits;
  v = (v | (v >> 1)) & 0x3333333333333333ULL;
  v = (v | (v >> 2)) & 0x0F0F0F0F0F0F0F0FULL;
  v = (v | (v >> 4)) & 0x00FF00FF00FF00FFULL;
  v = (v | (v >> 8)) & 0x0000FFFF0000FFFFULL;
  v = (v | (v >> 16)) & 0x00000000FFFFFFFFULL;
  return v;
}

inline std::uint64_t spread_to_even_bits(std::uint64_t v) {
  v &= 0xFFFFFFFFULL;
  v = (v | (v << 16)) & 0x0000FFFF0000FFFFULL;
  v = (v | (v << 8)) & 0x00FF00FF00FF00FFULL;
  v = (v | (v << 4)) & 0x0F0F0F0F0F0F0F0FULL;
  v = (v | (v << 2)) & 0x3333333333333333ULL;
  v = (v | (v << 1)) & 0x5555555555555555ULL;
  return v;
}

// With letters I=0, X=1, Y=2, Z=3 the high bit of each digit is the Z flag
// and low^high is the X flag. Products of strings are XORs of codes.
inline std::uint64_t x_flags(std::uint64_t code) { return (code ^ (code >> 1)) & kEvenBits; }
inline std::uint64_t z_flags(std::uint64_t code) { return (code >> 1) & kEvenBits; }

/// e such that sigma_a sigma_b = i^e sigma_{a^b}, using Y = i X Z per qubit.
inline int product_phase_exponent(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t c = a ^ b;
  const std::uint64_t xa = x_flags(a), za = z_flags(a);
  const std::uint64_t xb = x_flags(b), zb = z_flags(b);
  const std::uint64_t xc = x_flags(c), zc = z_flags(c);
  const int e = std::popcount(xa & za) + std::popcount(xb & zb) - std::popcount(xc & zc) +
                2 * std::popcount(za & xb);
  return ((e % 4) + 4) % 4;
}

inline bool codes_commute(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t s = (x_flags(a) & z_flags(b)) ^ (z_flags(a) & x_flags(b));
  return (std::popcount(s) & 1) == 0;
}

inline cplx i_power(int e) {
  switch (e & 3) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEni") == std::string::npos) s += ".0";
  return s;
}

}  // namespace detail

/// Tensor product of single-qubit Paulis. Qubit 0 is the leftmost tensor
/// factor and the most significant bit of amplitude indices; it occupies the
/// most significant base-4 digit of `code()`.
class PauliString {
 public:
  PauliString() = default;

  PauliString(int n_qubits, std::uint64_t code) : n_(n_qubits), code_(code) {
    if (n_qubits < 1 || n_qubits > kMaxPauliQubits)
      throw Error(ErrorKind::InvalidArgument, "PauliString qubit count out of range");
    if (n_qubits < 32 && (code >> (2 * n_qubits)) != 0)
      throw Error(ErrorKind::InvalidArgument, "PauliString code exceeds 4^n");
  }

  static PauliString identity(int n_qubits) { return {n_qubits, 0}; }

  static PauliString from_letters(std::string_view letters) {
    if (letters.empty()) throw Error(ErrorKind::ParseError, "empty Pauli string");
    std::uint64_t code = 0;
    for (char ch : letters) {
      code <<= 2;
      switch (ch) {
        case 'I': break;
        case 'X': code |= 1; break;
        case 'Y': code |= 2; break;
        case 'Z': code |= 3; break;
        default:
          throw Error(ErrorKind::ParseError, std::string("bad Pauli letter '") + ch + "'");
      }
    }
    return {static_cast<int>(letters.size()), code};
  }

  static PauliString single(int n_qubits, int qubit, Letter letter) {
    return identity(n_qubits).with_letter(qubit, letter);
  }

  int n_qubits() const noexcept { return n_; }
  std::uint64_t code() const noexcept { return code_; }

  Letter letter(int qubit) const {
    check_qubit(qubit);
    return static_cast<Letter>((code_ >> shift(qubit)) & 3U);
  }

  PauliString with_letter(int qubit, Letter l) const {
    check_qubit(qubit);
    std::uint64_t c = code_ & ~(std::uint64_t{3} << shift(qubit));
    c |= static_cast<std::uint64_t>(l) << shift(qubit);
    return {n_, c};
  }

  int count(Letter l) const {
    int k = 0;
    for (int q = 0; q < n_; ++q) k += letter(q) == l ? 1 : 0;
    return k;
  }
  int weight() const { return n_ - count(Letter::I); }
  bool is_identity() const { return code_ == 0; }
  /// Only I and Z letters.
  bool is_diagonal() const { return detail::x_flags(code_) == 0; }

  std::vector<int> support() const {
    std::vector<int> s;
    for (int q = 0; q < n_; ++q)
      if (letter(q) != Letter::I) s.push_back(q);
    return s;
  }

  /// Bit (n-1-q) set when qubit q carries X or Y.
  std::uint64_t x_mask() const { return detail::compact_even_bits(detail::x_flags(code_)); }
  /// Bit (n-1-q) set when qubit q carries Y or Z.
  std::uint64_t z_mask() const { return detail::compact_even_bits(detail::z_flags(code_)); }

  std::string str() const {
    static constexpr char kLetters[] = {'I', 'X', 'Y', 'Z'};
    std::string s;
    for (int q = 0; q < n_; ++q) s += kLetters[static_cast<int>(letter(q))];
    return s;
  }

  friend auto operator<=>(const PauliString &, const PauliString &) = default;

 private:
  int shift(int qubit) const { return 2 * (n_ - 1 - qubit); }
  void check_qubit(int qubit) const {
    if (qubit < 0 || qubit >= n_) throw Error(ErrorKind::IndexOutOfRange, "qubit index");
  }

  int n_ = 1;
  std::uint64_t code_ = 0;
};

struct PauliProduct {
  cplx phase;
  PauliString string;
};

inline void require_same_size(const PauliString &a, const PauliString &b) {
  if (a.n_qubits() != b.n_qubits())
    throw Error(ErrorKind::SizeMismatch, a.str() + " vs " + b.str());
}

inline PauliProduct multiply(const PauliString &a, const PauliString &b) {
  require_same_size(a, b);
  return {detail::i_power(detail::product_phase_exponent(a.code(), b.code())),
          PauliString(a.n_qubits(), a.code() ^ b.code())};
}

inline bool commutes(const PauliString &a, const PauliString &b) {
  require_same_size(a, b);
  return detail::codes_commute(a.code(), b.code());
}

struct Commutator {
  cplx coefficient{0.0, 0.0};
  std::optional<PauliString> result;
};

/// [a, b] = coefficient * result; `result` is empty when the strings commute.
inline Commutator commutator(const PauliString &a, const PauliString &b) {
  require_same_size(a, b);
  if (detail::codes_commute(a.code(), b.code())) return {};
  const PauliProduct p = multiply(a, b);
  return {2.0 * p.phase, p.string};
}

/// sigma^T = (-1)^{#Y} sigma.
inline int transpose_parity(const PauliString &p) {
  return (std::popcount(detail::x_flags(p.code()) & detail::z_flags(p.code())) & 1) ? -1 : 1;
}

/// Sparse operator in the Pauli basis, iterated in code order.
class PauliSum {
 public:
  using TermMap = std::map<std::uint64_t, cplx>;

  explicit PauliSum(int n_qubits = 1) : n_(n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxPauliQubits)
      throw Error(ErrorKind::InvalidArgument, "PauliSum qubit count out of range");
  }

  static PauliSum from_terms(std::initializer_list<std::pair<std::string_view, cplx>> terms) {
    if (terms.size() == 0) throw Error(ErrorKind::InvalidArgument, "from_terms needs a term");
    PauliSum s(static_cast<int>(terms.begin()->first.size()));
    for (const auto &[letters, c] : terms) s.add(PauliString::from_letters(letters), c);
    return s;
  }

  int n_qubits() const noexcept { return n_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  const TermMap &terms() const noexcept { return terms_; }

  void add(const PauliString &p, cplx c) {
    if (p.n_qubits() != n_) throw Error(ErrorKind::SizeMismatch, "term size " + p.str());
    auto [it, inserted] = terms_.try_emplace(p.code(), c);
    if (!inserted) it->second += c;
    if (std::abs(it->second) < kPruneTolerance) terms_.erase(it);
  }

  cplx coefficient(const PauliString &p) const {
    if (p.n_qubits() != n_) throw Error(ErrorKind::SizeMismatch, "term size " + p.str());
    auto it = terms_.find(p.code());
    return it == terms_.end() ? cplx{} : it->second;
  }

  std::vector<std::pair<PauliString, cplx>> items() const {
    std::vector<std::pair<PauliString, cplx>> out;
    out.reserve(terms_.size());
    for (const auto &[code, c] : terms_) out.emplace_back(PauliString(n_, code), c);
    return out;
  }

  /// Non-identity terms with their real parts; meant for Hermitian sums.
  std::vector<std::pair<PauliString, double>> real_terms(bool skip_identity = true) const {
    std::vector<std::pair<PauliString, double>> out;
    for (const auto &[code, c] : terms_) {
      if (skip_identity && code == 0) continue;
      out.emplace_back(PauliString(n_, code), c.real());
    }
    return out;
  }

  bool is_hermitian(double tol = kPruneTolerance) const {
    for (const auto &[code, c] : terms_)
      if (std::abs(c.imag()) > tol) return false;
    return true;
  }

  /// Hilbert-Schmidt norm squared, Tr(A^dagger A) = 2^N sum |c|^2.
  double hs_norm_squared() const {
    double s = 0.0;
    for (const auto &[code, c] : terms_) s += std::norm(c);
    return s * std::ldexp(1.0, n_);
  }

  PauliSum &operator+=(const PauliSum &o) {
    check_same(o);
    for (const auto &[code, c] : o.terms_) add(PauliString(n_, code), c);
    return *this;
  }
  PauliSum &operator-=(const PauliSum &o) {
    check_same(o);
    for (const auto &[code, c] : o.terms_) add(PauliString(n_, code), -c);
    return *this;
  }
  PauliSum &operator*=(cplx s) {
    TermMap next;
    for (const auto &[code, c] : terms_) {
      const cplx v = c * s;
      if (std::abs(v) >= kPruneTolerance) next.emplace(code, v);
    }
    terms_ = std::move(next);
    return *this;
  }

  friend PauliSum operator+(PauliSum a, const PauliSum &b) { return a += b; }
  friend PauliSum operator-(PauliSum a, const PauliSum &b) { return a -= b; }
  friend PauliSum operator*(PauliSum a, cplx s) { return a *= s; }
  friend PauliSum operator*(cplx s, PauliSum a) { return a *= s; }

  friend PauliSum operator*(const PauliSum &a, const PauliSum &b) {
    a.check_same(b);
    PauliSum out(a.n_);
    for (const auto &[ca, va] : a.terms_)
      for (const auto &[cb, vb] : b.terms_)
        out.add(PauliString(a.n_, ca ^ cb),
                va * vb * detail::i_power(detail::product_phase_exponent(ca, cb)));
    return out;
  }

  bool approx_equal(const PauliSum &o, double tol) const {
    if (o.n_ != n_) return false;
    PauliSum d = *this - o;
    for (const auto &[code, c] : d.terms_)
      if (std::abs(c) > tol) return false;
    return true;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto &[code, c] : terms_) {
      const std::string letters = PauliString(n_, code).str();
      if (c.imag() == 0.0) {
        if (first) {
          out += detail::format_double(c.real());
        } else if (std::signbit(c.real())) {
          out += " - " + detail::format_double(-c.real());
        } else {
          out += " + " + detail::format_double(c.real());
        }
      } else {
        if (!first) out += " + ";
        out += "(" + detail::format_double(c.real()) + "," + detail::format_double(c.imag()) + ")";
      }
      out += "*" + letters;
      first = false;
    }
    return out;
  }

  /// Parses "1.0*ZI - 0.5*XX + (0,1)*YZ + IZ". `n_qubits` is inferred from
  /// the first term when zero; "0" yields an empty sum (then n_qubits is
  /// required).
  static PauliSum parse(std::string_view text, int n_qubits = 0);

 private:
  void check_same(const PauliSum &o) const {
    if (o.n_ != n_) throw Error(ErrorKind::SizeMismatch, "PauliSum qubit counts differ");
  }

  int n_;
  TermMap terms_;
};

namespace detail {

class PauliParser {
 public:
  explicit PauliParser(std::string_view text) : s_(text) {}

  PauliSum run(int n_qubits) {
    std::vector<std::pair<PauliString, cplx>> terms;
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '0') {
      std::size_t save = pos_;
      ++pos_;
      skip_ws();
      if (pos_ == s_.size()) {
        if (n_qubits <= 0) fail("qubit count required for the zero operator");
        return PauliSum(n_qubits);
      }
      pos_ = save;
    }
    bool first = true;
    while (true) {
      skip_ws();
      if (pos_ == s_.size()) {
        if (first) fail("empty expression");
        break;
      }
      double sign = 1.0;
      if (!first) {
        if (s_[pos_] == '+') {
          ++pos_;
        } else if (s_[pos_] == '-') {
          sign = -1.0;
          ++pos_;
        } else {
          fail("expected '+' or '-'");
        }
        skip_ws();
      } else if (s_[pos_] == '-' || s_[pos_] == '+') {
        sign = s_[pos_] == '-' ? -1.0 : 1.0;
        ++pos_;
        skip_ws();
      }
      cplx coeff{1.0, 0.0};
      bool has_coeff = false;
      if (pos_ < s_.size() && s_[pos_] == '(') {
        ++pos_;
        const double re = number();
        skip_ws();
        expect(',');
        const double im = number();
        skip_ws();
        expect(')');
        coeff = {re, im};
        has_coeff = true;
      } else if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) ||
                                      s_[pos_] == '.')) {
        coeff = number();
        has_coeff = true;
      }
      skip_ws();
      if (has_coeff) {
        expect('*');
        skip_ws();
      }
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::string_view("IXYZ").find(s_[pos_]) != std::string_view::npos)
        ++pos_;
      if (pos_ == start) fail("expected Pauli letters");
      terms.emplace_back(PauliString::from_letters(s_.substr(start, pos_ - start)), sign * coeff);
      first = false;
    }
    const int n = n_qubits > 0 ? n_qubits : terms.front().first.n_qubits();
    PauliSum out(n);
    for (const auto &[p, c] : terms) {
      if (p.n_qubits() != n) throw Error(ErrorKind::ParseError, "inconsistent string length " + p.str());
      out.add(p, c);
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string &msg) const {
    throw Error(ErrorKind::ParseError, msg + " at position " + std::to_string(pos_));
  }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  void expect(char c) {
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  double number() {
    skip_ws();
    double v = 0.0;
    auto res = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (res.ec != std::errc()) fail("bad number");
    pos_ = static_cast<std::size_t>(res.ptr - s_.data());
    return v;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline PauliSum PauliSum::parse(std::string_view text, int n_qubits) {
  return detail::PauliParser(text).run(n_qubits);
}

/// [A, B] for sums.
inline PauliSum commutator(const PauliSum &a, const PauliSum &b) {
  if (a.n_qubits() != b.n_qubits()) throw Error(ErrorKind::SizeMismatch, "commutator sizes");
  PauliSum out(a.n_qubits());
  for (const auto &[ca, va] : a.terms())
    for (const auto &[cb, vb] : b.terms()) {
      if (detail::codes_commute(ca, cb)) continue;
      out.add(PauliString(a.n_qubits(), ca ^ cb),
              2.0 * va * vb * detail::i_power(detail::product_phase_exponent(ca, cb)));
    }
  return out;
}

inline Eigen::MatrixXcd to_dense(const PauliString &p) {
  const std::size_t dim = std::size_t{1} << p.n_qubits();
  const std::uint64_t xm = p.x_mask(), zm = p.z_mask();
  const cplx base = detail::i_power(std::popcount(xm & zm));
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t col = 0; col < dim; ++col) {
    const double sign = (std::popcount(zm & col) & 1) ? -1.0 : 1.0;
    m(static_cast<Eigen::Index>(col ^ xm), static_cast<Eigen::Index>(col)) = base * sign;
  }
  return m;
}

/// Dense reconstruction sum_j c_j sigma_j.
inline Eigen::MatrixXcd to_dense(const PauliSum &s) {
  const std::size_t dim = std::size_t{1} << s.n_qubits();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto &[code, c] : s.terms()) {
    const PauliString p(s.n_qubits(), code);
    const std::uint64_t xm = p.x_mask(), zm = p.z_mask();
    const cplx base = c * detail::i_power(std::popcount(xm & zm));
    for (std::size_t col = 0; col < dim; ++col) {
      const double sign = (std::popcount(zm & col) & 1) ? -1.0 : 1.0;
      m(static_cast<Eigen::Index>(col ^ xm), static_cast<Eigen::Index>(col)) += base * sign;
    }
  }
  return m;
}

inline int qubits_for_dimension(Eigen::Index rows, Eigen::Index cols) {
  if (rows != cols || rows < 2 || (rows & (rows - 1)) != 0)
    throw Error(ErrorKind::BadDimension,
                "matrix is " + std::to_string(rows) + "x" + std::to_string(cols));
  return std::countr_zero(static_cast<std::uint64_t>(rows));
}

/// Pauli coefficients c_j = Tr(M sigma_j) / 2^N of an arbitrary square
/// matrix; one Walsh-Hadamard transform per X pattern.
inline PauliSum decompose_operator(const Eigen::MatrixXcd &m) {
  const int n = qubits_for_dimension(m.rows(), m.cols());
  if (n > 12) throw Error(ErrorKind::BadDimension, "decomposition limited to 12 qubits");
  const std::size_t dim = std::size_t{1} << n;
  const double scale = 1.0 / static_cast<double>(dim);
  PauliSum out(n);
  std::vector<cplx> f(dim);
  for (std::uint64_t x = 0; x < dim; ++x) {
    bool any = false;
    for (std::size_t j = 0; j < dim; ++j) {
      f[j] = m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j ^ x));
      any = any || f[j] != cplx{};
    }
    if (!any) continue;
    for (std::size_t len = 1; len < dim; len <<= 1)
      for (std::size_t i = 0; i < dim; i += 2 * len)
        for (std::size_t k = i; k < i + len; ++k) {
          const cplx a = f[k], b = f[k + len];
          f[k] = a + b;
          f[k + len] = a - b;
        }
    for (std::uint64_t z = 0; z < dim; ++z) {
      const cplx c = f[z] * scale * detail::i_power(std::popcount(x & z));
      if (std::abs(c) < kPruneTolerance) continue;
      const std::uint64_t code =
          detail::spread_to_even_bits(x ^ z) | (detail::spread_to_even_bits(z) << 1);
      out.add(PauliString(n, code), c);
    }
  }
  return out;
}

/// Decomposition of a Hermitian matrix (checked to 1e-10); coefficients are
/// returned real.
inline PauliSum decompose(const Eigen::MatrixXcd &m) {
  qubits_for_dimension(m.rows(), m.cols());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw Error(ErrorKind::NonHermitian, "decompose expects a Hermitian matrix");
  PauliSum raw = decompose_operator(m);
  PauliSum out(raw.n_qubits());
  for (const auto &[code, c] : raw.terms()) out.add(PauliString(raw.n_qubits(), code), c.real());
  return out;
}

struct StructureEntry {
  std::uint64_t h;
  cplx coefficient;
};

/// [sigma_l^T, sigma_j] = F_{ljh} sigma_h for every pair of strings; at most
/// one h is nonzero per pair and F is 0 or +-2i.
class StructureTable {
 public:
  explicit StructureTable(int n_qubits) : n_(n_qubits) {
    if (n_qubits < 1) throw Error(ErrorKind::InvalidArgument, "structure table size");
    if (n_qubits > 4) throw Error(ErrorKind::TableTooLarge, "structure tables stop at 4 qubits");
    const std::uint64_t d = basis_size();
    entries_.resize(d * d);
    for (std::uint64_t l = 0; l < d; ++l) {
      const int parity = transpose_parity(PauliString(n_, l));
      for (std::uint64_t j = 0; j < d; ++j) {
        if (detail::codes_commute(l, j)) continue;
        const cplx c = 2.0 * static_cast<double>(parity) *
                       detail::i_power(detail::product_phase_exponent(l, j));
        entries_[l * d + j] = StructureEntry{l ^ j, c};
      }
    }
  }

  int n_qubits() const noexcept { return n_; }
  std::uint64_t basis_size() const noexcept { return std::uint64_t{1} << (2 * n_); }

  const std::optional<StructureEntry> &entry(std::uint64_t l, std::uint64_t j) const {
    if (l >= basis_size() || j >= basis_size())
      throw Error(ErrorKind::IndexOutOfRange, "structure table index");
    return entries_[l * basis_size() + j];
  }
  const std::optional<StructureEntry> &entry(const PauliString &l, const PauliString &j) const {
    return entry(l.code(), j.code());
  }

 private:
  int n_;
  std::vector<std::optional<StructureEntry>> entries_;
};

inline StructureTable build_structure_table(int n_qubits) { return StructureTable(n_qubits); }

}  // namespace vagt
