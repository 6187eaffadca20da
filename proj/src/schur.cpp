#include "sfg/schur.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>

#include "sfg/errors.hpp"

namespace sfg {

namespace {

using Complex = std::complex<double>;

// Swap the diagonal entries t(k,k) and t(k+1,k+1) of an upper-triangular t by
// a unitary similarity confined to rows/columns k and k+1.  The first column
// of the 2x2 transform is the normalized eigenvector of the trailing
// eigenvalue, which keeps the factor triangular.
void swap_adjacent(ComplexMatrix& u, ComplexMatrix& t, int k) {
  const int n = static_cast<int>(t.rows());
  const Complex a = t(k, k);
  const Complex b = t(k, k + 1);
  const Complex c = t(k + 1, k + 1);

  const Complex v0 = b;
  const Complex v1 = c - a;
  const double norm = std::sqrt(std::norm(v0) + std::norm(v1));
  if (norm == 0.0) return;  // equal eigenvalues, nothing to move

  const Complex g0 = v0 / norm;
  const Complex g1 = v1 / norm;
  // q = [g0 -conj(g1); g1 conj(g0)] is unitary with first column (g0, g1).
  Eigen::Matrix2cd q;
  q << g0, -std::conj(g1), g1, std::conj(g0);

  t.block(0, k, k + 2, 2) = t.block(0, k, k + 2, 2) * q;
  t.block(k, k, 2, n - k) = q.adjoint() * t.block(k, k, 2, n - k);
  u.block(0, k, n, 2) = u.block(0, k, n, 2) * q;
  t(k + 1, k) = 0.0;  // clear rounding residue below the diagonal
}

}  // namespace

int order_schur_stable_first(ComplexMatrix& u, ComplexMatrix& t,
                             double margin) {
  const int n = static_cast<int>(t.rows());
  const auto stable = [&](int i) { return t(i, i).real() < -margin; };
  // Selection sort by unitary swaps: bubble the next stable eigenvalue up to
  // the frontier.
  int frontier = 0;
  for (int i = 0; i < n; ++i) {
    if (!stable(i)) continue;
    for (int k = i; k > frontier; --k) swap_adjacent(u, t, k - 1);
    ++frontier;
  }
  return frontier;
}

StableSubspace stable_invariant_subspace(const Matrix& a, double margin) {
  Eigen::ComplexSchur<ComplexMatrix> schur(a.cast<Complex>());
  if (schur.info() != Eigen::Success)
    throw SolveError("complex Schur decomposition failed");
  ComplexMatrix u = schur.matrixU();
  ComplexMatrix t = schur.matrixT();
  const int n_stable = order_schur_stable_first(u, t, margin);

  StableSubspace out;
  out.n_stable = n_stable;
  out.eigenvalues = t.diagonal();
  if (n_stable == 0) {
    out.basis = Matrix(a.rows(), 0);
    return out;
  }

  // The leading n_stable Schur vectors span the subspace over C; for real
  // input the subspace is conjugation-closed, so the real and imaginary
  // parts together span it over R.  Orthonormalize and keep the first
  // n_stable directions.
  const ComplexMatrix leading = u.leftCols(n_stable);
  Matrix stacked(a.rows(), 2 * n_stable);
  stacked << leading.real(), leading.imag();
  Eigen::ColPivHouseholderQR<Matrix> qr(stacked);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), n_stable);
  out.basis = q;
  return out;
}

Matrix solve_lyapunov(const Matrix& s, const Matrix& c) {
  const int n = static_cast<int>(s.rows());
  if (s.cols() != n || c.rows() != n || c.cols() != n)
    throw SolveError("solve_lyapunov: shape mismatch");

  Eigen::ComplexSchur<ComplexMatrix> schur(s.cast<Complex>());
  if (schur.info() != Eigen::Success)
    throw SolveError("complex Schur decomposition failed");
  const ComplexMatrix& u = schur.matrixU();
  const ComplexMatrix& t = schur.matrixT();

  // s = u t u^H turns s^T x + x s = c into t^H y + y t = u^H c u with
  // y = u^H x u.  Column k only involves earlier columns because t is upper
  // triangular, and each solve is with the lower-triangular t^H + t_kk I.
  const ComplexMatrix ct = u.adjoint() * c.cast<Complex>() * u;
  ComplexMatrix y(n, n);
  for (int k = 0; k < n; ++k) {
    ComplexVector rhs = ct.col(k);
    for (int j = 0; j < k; ++j) rhs -= t(j, k) * y.col(j);
    ComplexMatrix lhs = t.adjoint();
    lhs.diagonal().array() += t(k, k);
    y.col(k) = lhs.triangularView<Eigen::Lower>().solve(rhs);
  }
  const ComplexMatrix x = u * y * u.adjoint();
  return sym(x.real());
}

}  // namespace sfg
