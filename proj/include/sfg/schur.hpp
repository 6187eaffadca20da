#pragma once

#include <complex>

#include "sfg/matrix.hpp"

namespace sfg {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Unitary similarity that moves every eigenvalue with real part below
/// -margin to the leading diagonal positions of the triangular factor.
/// Returns the number of such eigenvalues.  On exit a = u t u^H still holds
/// for the input matrix a.
int order_schur_stable_first(ComplexMatrix& u, ComplexMatrix& t, double margin);

struct StableSubspace {
  Matrix basis;          // orthonormal columns spanning the subspace
  int n_stable = 0;      // eigenvalues with Re < -margin
  ComplexVector eigenvalues;  // full spectrum, stable-first ordering
};

/// Real basis of the invariant subspace of `a` associated with eigenvalues
/// of real part below -margin.  The subspace is closed under conjugation for
/// real input, so a real orthonormal basis exists.
StableSubspace stable_invariant_subspace(const Matrix& a, double margin);

/// Solve s^T x + x s = c for symmetric c with s Hurwitz (Bartels-Stewart on
/// the complex Schur form of s; never factors anything larger than s).
Matrix solve_lyapunov(const Matrix& s, const Matrix& c);

}  // namespace sfg
