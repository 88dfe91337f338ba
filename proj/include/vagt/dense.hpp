#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "vagt/error.hpp"

namespace vagt {

using DenseOp = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline void require_finite(const DenseOp &m, const char *what) {
  if (!m.allFinite()) throw Error(ErrorKind::NumericalBreakdown, std::string(what) + " is not finite");
}

inline bool is_hermitian(const DenseOp &m, double tol = 1e-10) {
  return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_unitary(const DenseOp &m, double tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  return (m.adjoint() * m - DenseOp::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

inline DenseOp kron(const DenseOp &a, const DenseOp &b) {
  DenseOp out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Multiply a column by a phase so its first non-negligible entry is real
/// and positive.
inline void fix_phase(Eigen::Ref<CVec> v, double tol = 1e-8) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > tol) {
      v *= std::conj(v(i)) / std::abs(v(i));
      return;
    }
  }
}

struct EigenSystem {
  Eigen::VectorXd values;  // ascending
  DenseOp vectors;         // columns
};

/// Hermitian eigendecomposition with a reproducible gauge. Each degenerate
/// cluster is re-expressed by Gram-Schmidt on its projector's columns, so the
/// result does not depend on the solver's internal basis choice.
inline EigenSystem eig(const DenseOp &h, double degeneracy_tol = 1e-9) {
  if (h.rows() != h.cols()) throw Error(ErrorKind::BadDimension, "eig expects a square matrix");
  require_finite(h, "eig input");
  if (!is_hermitian(h)) throw Error(ErrorKind::NonHermitian, "eig expects a Hermitian matrix");
  const DenseOp sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseOp> solver(sym);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::NumericalBreakdown, "eigensolver failed");
  EigenSystem out{solver.eigenvalues(), solver.eigenvectors()};
  const Eigen::Index n = out.values.size();
  const double scale = std::max(1.0, out.values.cwiseAbs().maxCoeff());
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index stop = start + 1;
    while (stop < n && out.values(stop) - out.values(stop - 1) <= degeneracy_tol * scale) ++stop;
    const Eigen::Index k = stop - start;
    if (k == 1) {
      fix_phase(out.vectors.col(start));
    } else {
      const DenseOp block = out.vectors.middleCols(start, k);
      const DenseOp proj = block * block.adjoint();
      DenseOp basis(n, k);
      Eigen::Index found = 0;
      for (Eigen::Index col = 0; col < n && found < k; ++col) {
        CVec v = proj.col(col);
        for (Eigen::Index p = 0; p < found; ++p) v -= basis.col(p) * basis.col(p).dot(v);
        for (Eigen::Index p = 0; p < found; ++p) v -= basis.col(p) * basis.col(p).dot(v);
        const double nv = v.norm();
        if (nv < 1e-6) continue;
        basis.col(found) = v / nv;
        fix_phase(basis.col(found));
        ++found;
      }
      if (found != k) throw Error(ErrorKind::NumericalBreakdown, "degenerate cluster rank deficit");
      out.vectors.middleCols(start, k) = basis;
      const double mean = out.values.segment(start, k).mean();
      out.values.segment(start, k).setConstant(mean);
    }
    start = stop;
  }
  return out;
}

inline Eigen::VectorXd eigenvalues(const DenseOp &h) {
  if (!is_hermitian(h)) throw Error(ErrorKind::NonHermitian, "eigenvalues expects a Hermitian matrix");
  Eigen::SelfAdjointEigenSolver<DenseOp> solver(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

/// e^{-i t h} for Hermitian h.
inline DenseOp expm(const DenseOp &h, double t) {
  if (!is_hermitian(h)) throw Error(ErrorKind::NonHermitian, "expm expects a Hermitian matrix");
  Eigen::SelfAdjointEigenSolver<DenseOp> solver(0.5 * (h + h.adjoint()));
  const Eigen::VectorXd &w = solver.eigenvalues();
  CVec phases(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) phases(i) = std::polar(1.0, -t * w(i));
  return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

/// Same as expm but reuses a decomposition; handy for time series.
inline DenseOp expm(const EigenSystem &es, double t) {
  CVec phases(es.values.size());
  for (Eigen::Index i = 0; i < es.values.size(); ++i) phases(i) = std::polar(1.0, -t * es.values(i));
  return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

/// Frobenius norm of the off-diagonal part.
inline double offdiag_norm(const DenseOp &m) {
  return (m - DenseOp(m.diagonal().asDiagonal())).norm();
}

/// Tracing out trailing qubits: rho is over (kept ⊗ traced) with the kept
/// register most significant.
inline DenseOp partial_trace_tail(const DenseOp &rho, int kept_qubits, int traced_qubits) {
  const Eigen::Index dk = Eigen::Index{1} << kept_qubits;
  const Eigen::Index dt = Eigen::Index{1} << traced_qubits;
  if (rho.rows() != dk * dt) throw Error(ErrorKind::SizeMismatch, "partial trace dimension");
  DenseOp out = DenseOp::Zero(dk, dk);
  for (Eigen::Index i = 0; i < dk; ++i)
    for (Eigen::Index j = 0; j < dk; ++j)
      for (Eigen::Index k = 0; k < dt; ++k) out(i, j) += rho(i * dt + k, j * dt + k);
  return out;
}

/// Reduced density matrix on `kept` qubits (ascending indices) of an
/// n-qubit pure state; qubit 0 is the most significant bit.
inline DenseOp reduced_density(const CVec &psi, int n_qubits, const std::vector<int> &kept) {
  const int nk = static_cast<int>(kept.size());
  const Eigen::Index dk = Eigen::Index{1} << nk;
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  if (psi.size() != dim) throw Error(ErrorKind::SizeMismatch, "reduced_density state size");
  std::vector<int> traced;
  for (int q = 0; q < n_qubits; ++q)
    if (std::find(kept.begin(), kept.end(), q) == kept.end()) traced.push_back(q);
  const int nt = static_cast<int>(traced.size());
  Eigen::MatrixXcd m(dk, Eigen::Index{1} << nt);
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    Eigen::Index a = 0, b = 0;
    for (int q : kept) a = (a << 1) | ((idx >> (n_qubits - 1 - q)) & 1);
    for (int q : traced) b = (b << 1) | ((idx >> (n_qubits - 1 - q)) & 1);
    m(a, b) = psi(idx);
  }
  return m * m.adjoint();
}

}  // namespace vagt
