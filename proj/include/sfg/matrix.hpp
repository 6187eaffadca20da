#pragma once

#include <Eigen/Dense>
#include <span>

namespace sfg {

// All dense storage is double precision Eigen.  Two norm conventions are used
// throughout the library:
//   * trajectory and state distances: Frobenius norm,
//   * coefficient bounds entering decay constants and attraction radii:
//     spectral (largest singular value) norm.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Symmetric part (m + m^T) / 2.
inline Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Frobenius norm (Eigen's default norm()).
inline double frobenius(const Matrix& m) { return m.norm(); }

/// Largest singular value.
double spectral_norm(const Matrix& m);

/// Smallest singular value (0 for empty matrices).
double smallest_singular_value(const Matrix& m);

/// Largest eigenvalue of the symmetric part of m.
double sym_eig_max(const Matrix& m);

/// Largest real part over the spectrum of m.
double spectral_abscissa(const Matrix& m);

/// True when every entry is finite.
bool all_finite(const Matrix& m);

/// Order-stable pairwise (cascade) summation.  Used wherever a reduction must
/// be independent of batching so repeated runs are byte-identical.
double pairwise_sum(std::span<const double> xs);

}  // namespace sfg
