#pragma once

// Shared test fixtures: the scalar baseline game, purpose-built variants
// exercising edge regimes, and filtered random-spec generators.

#include <cmath>
#include <optional>
#include <stdexcept>

#include "sfg/errors.hpp"
#include "sfg/game_spec.hpp"
#include "sfg/reduced.hpp"
#include "sfg/rng.hpp"
#include "sfg/scalar.hpp"

namespace sfg::fixtures {

inline Matrix m1x1(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return m;
}

/// Scalar baseline: every dimension 1, mild two-time-scale coupling,
/// closed-form reduced constants (P22bar = sqrt(2)-1, S = -sqrt(2)).
inline GameSpec s1() {
  GameSpec s;
  s.n1 = s.n2 = s.k1 = s.k2 = s.m1 = s.m2 = 1;
  s.T = 2.0;
  s.A11 = m1x1(-1.0);
  s.A12 = m1x1(1.0);
  s.A21 = m1x1(0.5);
  s.A22 = m1x1(-1.0);
  s.B11 = m1x1(1.0);
  s.B12 = m1x1(0.5);
  s.B21 = m1x1(0.0);
  s.B22 = m1x1(1.0);
  s.sigma1 = m1x1(1.0);
  s.sigma2 = m1x1(1.0);
  s.Q1 = m1x1(1.0);
  s.Q2 = m1x1(1.0);
  return s;
}

/// S1 with both state weights zero: every Riccati object is identically
/// zero, so all gains, errors, and values vanish.
inline GameSpec zero_cost() {
  GameSpec s = s1();
  s.Q1 = m1x1(0.0);
  s.Q2 = m1x1(0.0);
  return s;
}

/// S1 with T = 1, Q2 = 4, B21 = 0.5: the fast control matrix couples into
/// both blocks and the terminal layer carries large data (P22bar = 4/3,
/// h(0) = 1/3, S = -2), so every feedback-gain gap integral is dominated by
/// its first-order layer term across eps in [1e-3, 1e-1] instead of the
/// second-order body term.  Reduced data stay exactly rational: Atilde =
/// -7/8, M = 9/16, N = 5/4, discriminant 1/16, DRE roots 10/9 and 2 (the
/// flow grows from 0 toward 10/9; no escape).
inline GameSpec layer_coupled() {
  GameSpec s = s1();
  s.T = 1.0;
  s.Q2 = m1x1(4.0);
  s.B21 = m1x1(0.5);
  return s;
}

/// Zero out both noise maps (deterministic dynamics).
inline GameSpec with_zero_noise(GameSpec s) {
  s.sigma1.setZero();
  s.sigma2.setZero();
  return s;
}

/// Decoupled zero-cost fast-relaxation problem at a short horizon T =
/// 10*eps: with zero gains and no noise the fast state decays like
/// exp(A22 * t/eps) exactly.
inline GameSpec relaxation(double eps) {
  GameSpec s = with_zero_noise(zero_cost());
  s.A21 = m1x1(0.0);
  s.T = 10.0 * eps;
  return s;
}

/// Fast block with an anti-stable open-loop matrix and zero fast weight:
/// the stabilizing root P22bar = 2 sits exactly on the attraction-ball
/// boundary 2*gamma/|Delta2| for every split delta, so no delta certifies.
inline GameSpec attraction_fail() {
  GameSpec s = s1();
  s.A22 = m1x1(1.0);
  s.Q2 = m1x1(0.0);
  return s;
}

/// Scalar reduced flow violating both solvability conditions
/// (Atilde = 1 > 0, M = 1.5, N = 1, discriminant = -0.5): the slow Riccati
/// flow escapes in finite backward time ~0.8704.
inline GameSpec blowup() {
  GameSpec s;
  s.n1 = s.n2 = s.k1 = s.k2 = s.m1 = s.m2 = 1;
  s.T = 1.0;
  s.A11 = m1x1(1.0);
  s.A12 = m1x1(0.0);
  s.A21 = m1x1(0.0);
  s.A22 = m1x1(-1.0);
  s.B11 = m1x1(std::sqrt(1.5));
  s.B12 = m1x1(0.0);
  s.B21 = m1x1(0.0);
  s.B22 = m1x1(1.0);
  s.sigma1 = m1x1(1.0);
  s.sigma2 = m1x1(1.0);
  s.Q1 = m1x1(1.0);
  s.Q2 = m1x1(1.0);
  return s;
}

/// Scalar problem whose reduced flow sits exactly on the double-root
/// boundary: Atilde = -1, M = 4, N = 1/4, discriminant = 0, with closed
/// form P(s) = s/4 / (1 + s).
inline GameSpec double_root() {
  GameSpec s = blowup();
  s.A11 = m1x1(-1.0);
  s.B11 = m1x1(2.0);
  s.Q1 = m1x1(0.25);
  s.T = 2.0;
  return s;
}

/// Complex-pair regime that still satisfies the second solvability
/// condition (Atilde = -1, M = 4, N = 1, discriminant = -3); escape sits at
/// backward time 2*pi/(3*sqrt(3)) ~ 1.209, outside the horizon T = 1.
inline GameSpec tangent_regime() {
  GameSpec s = double_root();
  s.Q1 = m1x1(1.0);
  s.T = 1.0;
  return s;
}

/// n2 = 2 problem with decoupled fast channels: the stabilizing fast root
/// is diag(sqrt(2)-1, sqrt(5)-2).
inline GameSpec are_diag() {
  GameSpec s;
  s.n1 = 1;
  s.n2 = 2;
  s.k1 = 1;
  s.k2 = 2;
  s.m1 = 1;
  s.m2 = 2;
  s.T = 1.0;
  s.A11 = m1x1(-1.0);
  s.A12 = Matrix::Zero(1, 2);
  s.A21 = Matrix::Zero(2, 1);
  s.A22 = Matrix::Zero(2, 2);
  s.A22(0, 0) = -1.0;
  s.A22(1, 1) = -2.0;
  s.B11 = m1x1(1.0);
  s.B12 = Matrix::Zero(1, 2);
  s.B21 = Matrix::Zero(2, 1);
  s.B22 = Matrix::Identity(2, 2);
  s.sigma1 = m1x1(1.0);
  s.sigma2 = Matrix::Identity(2, 2);
  s.Q1 = m1x1(1.0);
  s.Q2 = Matrix::Identity(2, 2);
  return s;
}

/// Delta2 exactly singular (B21 = B22 = 1): assumption 3.1 must fail.
inline GameSpec delta2_singular() {
  GameSpec s = s1();
  s.B21 = m1x1(1.0);
  s.B22 = m1x1(1.0);
  return s;
}

inline Matrix random_matrix(DrawStream& draw, int rows, int cols,
                            double scale) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = scale * draw.uniform(-1.0, 1.0);
  return m;
}

inline Matrix random_psd(DrawStream& draw, int n, double scale) {
  const Matrix c = random_matrix(draw, n, n, scale);
  return Matrix((c.transpose() * c) / static_cast<double>(n));
}

/// Unfiltered random candidate with n1, n2 <= nmax.  A22 is shifted
/// Hurwitz and B22 dominates B21, which makes Delta2 negative definite for
/// the chosen scales, but callers still filter through solve_reduced.
inline GameSpec random_candidate(DrawStream& draw, int nmax) {
  GameSpec s;
  s.n1 = 1 + static_cast<int>(draw.uniform(0.0, 1.0) * nmax) % nmax;
  s.n2 = 1 + static_cast<int>(draw.uniform(0.0, 1.0) * nmax) % nmax;
  s.k1 = 1 + static_cast<int>(draw.uniform(0.0, 1.0) * 2.0) % 2;
  s.k2 = s.n2;  // keep the fast channel fully actuated
  s.m1 = 1;
  s.m2 = 1;
  s.T = draw.uniform(0.5, 2.0);
  s.A11 = random_matrix(draw, s.n1, s.n1, 1.0);
  s.A12 = random_matrix(draw, s.n1, s.n2, 1.0);
  s.A21 = random_matrix(draw, s.n2, s.n1, 1.0);
  s.A22 = random_matrix(draw, s.n2, s.n2, 0.5);
  s.A22 -= 2.0 * Matrix::Identity(s.n2, s.n2);
  s.B11 = random_matrix(draw, s.n1, s.k1, 1.0);
  s.B12 = random_matrix(draw, s.n1, s.k2, 0.5);
  s.B21 = random_matrix(draw, s.n2, s.k1, 0.2);
  s.B22 = random_matrix(draw, s.n2, s.k2, 0.2);
  s.B22 += 1.5 * Matrix::Identity(s.n2, s.k2);
  s.sigma1 = random_matrix(draw, s.n1, s.m1, 1.0);
  s.sigma2 = random_matrix(draw, s.n2, s.m2, 1.0);
  s.Q1 = random_psd(draw, s.n1, 1.0);
  s.Q2 = random_psd(draw, s.n2, 1.0);
  return s;
}

/// Random spec on which the whole reduced pipeline succeeds.
inline GameSpec random_reduced_ok(DrawStream& draw, int nmax = 4) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    GameSpec s = random_candidate(draw, nmax);
    try {
      (void)checked(s);
      (void)solve_reduced(s);
      return s;
    } catch (const SolveError&) {
    }
  }
  throw std::runtime_error("random_reduced_ok: no admissible spec found");
}

/// Random scalar spec satisfying the scalar solvability disjunction with no
/// finite-time escape inside [0, T] (margin 1.2x), so the closed-form
/// trajectory exists on the whole horizon.
inline GameSpec random_scalar_ok(DrawStream& draw) {
  for (int attempt = 0; attempt < 500; ++attempt) {
    GameSpec s;
    s.n1 = s.n2 = s.k1 = s.k2 = s.m1 = s.m2 = 1;
    s.T = draw.uniform(0.5, 2.0);
    s.A11 = m1x1(draw.uniform(-1.0, 1.0));
    s.A12 = m1x1(draw.uniform(-1.0, 1.0));
    s.A21 = m1x1(draw.uniform(-1.0, 1.0));
    s.A22 = m1x1(draw.uniform(-2.0, -0.5));
    s.B11 = m1x1(draw.uniform(-1.0, 1.0));
    s.B12 = m1x1(draw.uniform(-1.0, 1.0));
    s.B21 = m1x1(draw.uniform(-0.6, 0.6));
    s.B22 = m1x1(draw.uniform(0.8, 1.5));
    s.sigma1 = m1x1(1.0);
    s.sigma2 = m1x1(1.0);
    s.Q1 = m1x1(draw.uniform(0.0, 1.5));
    s.Q2 = m1x1(draw.uniform(0.0, 1.5));
    try {
      const ScalarConditions cond = scalar_conditions(s);
      if (!cond.cond_dre_a && !cond.cond_dre_b) continue;
      const std::optional<double> esc = scalar_dre_escape(cond.coeffs);
      if (esc && *esc <= 1.2 * s.T) continue;
      return s;
    } catch (const SolveError&) {
    }
  }
  throw std::runtime_error("random_scalar_ok: no admissible spec found");
}

}  // namespace sfg::fixtures
