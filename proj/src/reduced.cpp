#include "sfg/reduced.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>

#include "sfg/errors.hpp"
#include "sfg/riccati.hpp"
#include "sfg/schur.hpp"

namespace sfg {

namespace {

void check_delta2(const Matrix& delta2) {
  const double smax = spectral_norm(delta2);
  const double smin = smallest_singular_value(delta2);
  if (smin <= 1e-10 * std::max(smax, 1e-300))
    throw Delta2SingularError(
        "fast control-weight block delta2 is numerically singular "
        "(smallest/largest singular value = " +
        format_double(smin) + " / " + format_double(smax) + ")");
}

Matrix are_residual(const GameSpec& spec, const Matrix& delta2,
                    const Matrix& p) {
  return sym(spec.A22.transpose() * p + p * spec.A22 + p * delta2 * p +
             spec.Q2);
}

}  // namespace

Matrix newton_refine_are(const GameSpec& spec, const Matrix& guess,
                         int max_iters, double tol) {
  const DeltaBlocks d = delta_blocks(spec);
  check_delta2(d.delta2);
  Matrix p = sym(guess);
  for (int iter = 0; iter < max_iters; ++iter) {
    const Matrix r = are_residual(spec, d.delta2, p);
    if (!all_finite(r))
      throw NoStabilizingSolutionError(
          "Newton iteration for the fast algebraic equation diverged");
    const Matrix s = spec.A22 + d.delta2 * p;
    const Matrix x = solve_lyapunov(s, -r);
    if (!all_finite(x))
      throw NoStabilizingSolutionError(
          "Newton correction for the fast algebraic equation is singular "
          "(closed-loop eigenvalue pair adds to zero)");
    p = sym(p + x);
    if (x.norm() <= tol * (1.0 + p.norm())) return p;
  }
  throw NoStabilizingSolutionError(
      "Newton iteration for the fast algebraic equation did not converge");
}

std::pair<Matrix, Matrix> solve_reduced_are(const GameSpec& raw) {
  const GameSpec spec = checked(raw);
  const int n2 = spec.n2;
  const DeltaBlocks d = delta_blocks(spec);
  check_delta2(d.delta2);

  Matrix ham(2 * n2, 2 * n2);
  ham.topLeftCorner(n2, n2) = spec.A22;
  ham.topRightCorner(n2, n2) = d.delta2;
  ham.bottomLeftCorner(n2, n2) = -spec.Q2;
  ham.bottomRightCorner(n2, n2) = -spec.A22.transpose();

  constexpr double kAxisMargin = 1e-10;
  const StableSubspace ss = stable_invariant_subspace(ham, kAxisMargin);
  for (Eigen::Index i = 0; i < ss.eigenvalues.size(); ++i)
    if (std::abs(ss.eigenvalues[i].real()) <= kAxisMargin)
      throw NoStabilizingSolutionError(
          "Hamiltonian eigenvalue " + format_double(ss.eigenvalues[i].real()) +
          " + " + format_double(ss.eigenvalues[i].imag()) +
          "i lies on the imaginary axis");
  if (ss.n_stable != n2)
    throw NoStabilizingSolutionError(
        "Hamiltonian stable subspace has dimension " +
        std::to_string(ss.n_stable) + ", expected " + std::to_string(n2));

  const Matrix x = ss.basis.topRows(n2);
  const Matrix y = ss.basis.bottomRows(n2);
  {
    Eigen::JacobiSVD<Matrix> svd(x);
    const double smax = svd.singularValues().maxCoeff();
    const double smin = svd.singularValues().minCoeff();
    if (smin <= 1e-12 * std::max(smax, 1e-300))
      throw NoStabilizingSolutionError(
          "stable subspace has a singular upper block (no graph form)");
  }
  // P = Y X^{-1}, solved as X^T P^T = Y^T.
  Matrix p = Eigen::PartialPivLU<Matrix>(x.transpose())
                 .solve(y.transpose())
                 .transpose();
  p = sym(p);
  p = newton_refine_are(spec, p);

  const Matrix s = spec.A22 + d.delta2 * p;
  const double margin = -spectral_abscissa(s);
  if (!(margin > kAxisMargin))
    throw NoStabilizingSolutionError(
        "closed-loop fast matrix is not Hurwitz (spectral abscissa " +
        format_double(-margin) + ")");
  const double res = frobenius(are_residual(spec, d.delta2, p));
  if (!(res < 1e-10))
    throw NoStabilizingSolutionError(
        "fast algebraic residual " + format_double(res) +
        " does not certify below 1e-10");
  return {p, s};
}

ReducedCoefficients reduced_coefficients(const GameSpec& spec,
                                         const Matrix& p22bar) {
  const DeltaBlocks d = delta_blocks(spec);
  check_delta2(d.delta2);
  const Matrix& A11 = spec.A11;
  const Matrix& A12 = spec.A12;
  const Matrix& A21 = spec.A21;
  const Matrix& A22 = spec.A22;

  ReducedCoefficients out;
  out.lambda =
      sym(A22.transpose() *
              Eigen::PartialPivLU<Matrix>(d.delta2).solve(A22) -
          spec.Q2);
  {
    const double smax = spectral_norm(out.lambda);
    const double smin = smallest_singular_value(out.lambda);
    if (smin <= 1e-10 * std::max(smax, 1e-300))
      throw LambdaSingularError(
          "elimination kernel Lambda is numerically singular "
          "(smallest/largest singular value = " +
          format_double(smin) + " / " + format_double(smax) + ")");
  }
  // Cross-check against the closed-loop identity Lambda = S^T Delta2^{-1} S;
  // a mismatch means p22bar is not the stabilizing root.
  {
    const Matrix s = A22 + d.delta2 * p22bar;
    const Matrix via_root =
        s.transpose() * Eigen::PartialPivLU<Matrix>(d.delta2).solve(s);
    const double drift = frobenius(sym(via_root) - out.lambda);
    if (drift > 1e-7 * (1.0 + frobenius(out.lambda)))
      throw SolveError(
          "reduced_coefficients: supplied fast block does not satisfy the "
          "algebraic equation (Lambda identity drift " +
          format_double(drift) + ")");
  }

  Eigen::PartialPivLU<Matrix> lu_d2(d.delta2);
  Eigen::PartialPivLU<Matrix> lu_lam(out.lambda);

  const Matrix lam_inv_a22t = lu_lam.solve(A22.transpose());
  const Matrix k = d.delta2 - A22 * lam_inv_a22t;  // symmetric
  const Matrix d2_inv_a21 = lu_d2.solve(A21);
  const Matrix d2_inv_dt = lu_d2.solve(d.delta.transpose());
  const Matrix lam_inv_a12t = lu_lam.solve(A12.transpose());

  out.a_tilde = A11 - d2_inv_dt.transpose() * k * d2_inv_a21 -
                A12 * lu_lam.solve(A22.transpose() * d2_inv_a21);

  const Matrix cross = d2_inv_dt.transpose() * (A22 * lam_inv_a12t);
  Matrix m = d.delta1 + A12 * lam_inv_a12t - cross - cross.transpose() -
             d2_inv_dt.transpose() * k * d2_inv_dt;
  Matrix n = spec.Q1 - d2_inv_a21.transpose() * k * d2_inv_a21;

  const double m_drift = frobenius(m - Matrix(m.transpose()));
  const double n_drift = frobenius(n - Matrix(n.transpose()));
  const double scale = 1.0 + std::max(frobenius(m), frobenius(n));
  if (m_drift > 1e-12 * scale || n_drift > 1e-12 * scale)
    throw SolveError(
        "reduced_coefficients: quadratic/constant coefficients drifted from "
        "symmetry (" +
        format_double(m_drift) + ", " + format_double(n_drift) + ")");
  out.m = sym(m);
  out.n = sym(n);
  return out;
}

Matrix ReducedDre::at(double t) const {
  double s = T - t;
  const Vector y = traj_s.value_at(s);
  return Eigen::Map<const Matrix>(y.data(), n1, n1);
}

Matrix ReducedDre::derivative_at(double t) const {
  double s = T - t;
  const Vector dy = traj_s.derivative_at(s);
  return -Eigen::Map<const Matrix>(dy.data(), n1, n1);
}

ReducedDre solve_reduced_dre(const GameSpec& spec,
                             const ReducedCoefficients& coeffs,
                             const OdeTolerance& tol) {
  const int n1 = spec.n1;
  const double T = spec.T;
  const Matrix& at = coeffs.a_tilde;
  const Matrix& m = coeffs.m;
  const Matrix& n = coeffs.n;

  const OdeRhs rhs = [&](double, const Vector& y, Vector& dyds) {
    const Eigen::Map<const Matrix> p(y.data(), n1, n1);
    dyds.resize(n1 * n1);
    Eigen::Map<Matrix>(dyds.data(), n1, n1) =
        sym(at.transpose() * p + p * at + p * m * p + n);
  };

  OdeOptions options;
  options.tol = tol;
  options.post_step = [n1](double, Vector& y) {
    Eigen::Map<Matrix> p(y.data(), n1, n1);
    const Matrix s = sym(p);
    if ((Matrix(p) - s).norm() > 1e-3 * (1.0 + s.norm())) return false;
    p = s;
    return true;
  };

  OdeResult result;
  try {
    result = integrate(rhs, 0.0, T, Vector::Zero(n1 * n1), options);
  } catch (const BlowUpError& e) {
    const double t_escape = T - e.t_escape;
    throw BlowUpError(t_escape,
                      "reduced slow Riccati flow escapes near t = " +
                          format_double(t_escape) +
                          " (bounded-flow hypothesis fails on this horizon)");
  }

  ReducedDre out;
  out.T = T;
  out.n1 = n1;
  out.traj_s = std::move(result.trajectory);
  const std::size_t n_nodes = out.traj_s.t.size();
  out.grid.reserve(n_nodes);
  for (std::size_t j = 0; j < n_nodes; ++j)
    out.grid.push_back(T - out.traj_s.t[n_nodes - 1 - j]);

  double p0 = 0.0;
  for (std::size_t j = 0; j < n_nodes; ++j) {
    p0 = std::max(p0, out.traj_s.y[j].norm());
    if (j + 1 < n_nodes)
      p0 = std::max(
          p0, out.traj_s.value_at(0.5 * (out.traj_s.t[j] + out.traj_s.t[j + 1]))
                  .norm());
  }
  out.p0 = p0;
  return out;
}

Matrix p12_bar(const Matrix& p11_at_t, const Matrix& p22bar,
               const GameSpec& spec) {
  const DeltaBlocks d = delta_blocks(spec);
  const Matrix s = spec.A22 + d.delta2 * p22bar;
  const Matrix num = spec.A21.transpose() * p22bar + p11_at_t * spec.A12 +
                     p11_at_t * d.delta * p22bar;
  // p12 = -num S^{-1}, solved as S^T X = num^T.
  return -Eigen::PartialPivLU<Matrix>(s.transpose())
              .solve(num.transpose())
              .transpose();
}

Matrix ReducedSolution::p12_at(double t) const {
  return p12_bar(p11bar.at(t), p22bar, spec);
}

ReducedSolution solve_reduced(const GameSpec& raw, const OdeTolerance& tol) {
  ReducedSolution rs;
  rs.spec = checked(raw);
  auto [p22, s] = solve_reduced_are(rs.spec);
  rs.p22bar = std::move(p22);
  rs.s = std::move(s);
  rs.coeffs = reduced_coefficients(rs.spec, rs.p22bar);
  rs.p11bar = solve_reduced_dre(rs.spec, rs.coeffs, tol);
  rs.gamma = -sym_eig_max(rs.s);
  rs.p0 = rs.p11bar.p0;
  return rs;
}

ReducedResiduals verify_reduced_system(const ReducedSolution& rs,
                                       const GameSpec& spec) {
  const DeltaBlocks d = delta_blocks(spec);
  ReducedResiduals res;
  res.res6c = frobenius(
      sym(spec.A22.transpose() * rs.p22bar + rs.p22bar * spec.A22 +
          rs.p22bar * d.delta2 * rs.p22bar + spec.Q2));

  const auto eval = [&](double t) {
    const Matrix p11 = rs.p11bar.at(t);
    const Matrix p12 = p12_bar(p11, rs.p22bar, spec);
    const FullRhs f0 = full_rhs(spec, d, p11, p12, rs.p22bar, 0.0);
    res.res6a =
        std::max(res.res6a, frobenius(rs.p11bar.derivative_at(t) + f0.slow));
    res.res6b = std::max(res.res6b, frobenius(f0.fast12));
  };
  const auto& g = rs.p11bar.grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    eval(g[i]);
    if (i + 1 < g.size()) eval(0.5 * (g[i] + g[i + 1]));
  }
  return res;
}

Json reduced_constants_json(const ReducedSolution& rs) {
  Json j;
  j["n1"] = rs.spec.n1;
  j["n2"] = rs.spec.n2;
  j["T"] = rs.spec.T;
  j["P22bar"] = matrix_to_json(rs.p22bar);
  j["S"] = matrix_to_json(rs.s);
  j["Atilde"] = matrix_to_json(rs.coeffs.a_tilde);
  j["M"] = matrix_to_json(rs.coeffs.m);
  j["N"] = matrix_to_json(rs.coeffs.n);
  j["Lambda"] = matrix_to_json(rs.coeffs.lambda);
  j["gamma"] = rs.gamma;
  j["p0"] = rs.p0;
  j["P11bar_at_0"] = matrix_to_json(rs.p11bar.at(0.0));
  return j;
}

void write_reduced_csv(const ReducedSolution& rs, std::ostream& os) {
  std::vector<std::string> names{"t"};
  for (const auto& n : block_column_names("P11bar", rs.spec.n1, rs.spec.n1))
    names.push_back(n);
  for (const auto& n : block_column_names("P12bar", rs.spec.n1, rs.spec.n2))
    names.push_back(n);
  write_csv_header(os, names);
  std::vector<double> row;
  for (double t : rs.p11bar.grid) {
    row.clear();
    row.push_back(t);
    append_row_major(row, rs.p11bar.at(t));
    append_row_major(row, rs.p12_at(t));
    write_csv_row(os, row);
  }
}

}  // namespace sfg
