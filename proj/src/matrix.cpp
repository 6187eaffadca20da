#include "sfg/matrix.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace sfg {

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double smallest_singular_value(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

double sym_eig_max(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym(m));
  return es.eigenvalues().maxCoeff();
}

double spectral_abscissa(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

namespace {
double pairwise_sum_range(const double* xs, std::size_t n) {
  // Below this size a simple loop is both fast and accurate enough; the
  // recursion above it fixes the reduction tree independently of callers.
  if (n <= 16) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += xs[i];
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_range(xs, half) + pairwise_sum_range(xs + half, n - half);
}
}  // namespace

double pairwise_sum(std::span<const double> xs) {
  return pairwise_sum_range(xs.data(), xs.size());
}

}  // namespace sfg
