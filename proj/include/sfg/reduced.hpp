#pragma once

#include <ostream>
#include <utility>
#include <vector>

#include "sfg/game_spec.hpp"
#include "sfg/io.hpp"
#include "sfg/matrix.hpp"
#include "sfg/ode.hpp"

namespace sfg {

/// Coefficients of the reduced slow Riccati equation
///   dP11bar/dt + Atilde^T P11bar + P11bar Atilde + P11bar M P11bar + N = 0,
/// obtained by eliminating the algebraic fast variables.  Lambda is the
/// elimination kernel A22^T Delta2^{-1} A22 - Q2; at the stabilizing fast
/// root it equals S^T Delta2^{-1} S.
struct ReducedCoefficients {
  Matrix a_tilde;  // n1 x n1
  Matrix m;        // n1 x n1 symmetric
  Matrix n;        // n1 x n1 symmetric
  Matrix lambda;   // n2 x n2 symmetric invertible
};

/// Backward trajectory of the reduced slow block on [0, T] (terminal value
/// zero), stored in reversed time internally, queried in forward time.
class ReducedDre {
 public:
  double T = 0.0;
  int n1 = 0;
  std::vector<double> grid;  // ascending t over the accepted nodes
  OdeTrajectory traj_s;
  double p0 = 0.0;  // sup_t Frobenius norm over nodes and midpoints

  Matrix at(double t) const;
  Matrix derivative_at(double t) const;  // d/dt
};

/// Everything the reduced differential-algebraic pair determines: the
/// stabilizing constant fast block, the slow trajectory, the affine mixed
/// block, and the stability data of the closed-loop fast matrix.
struct ReducedSolution {
  GameSpec spec;  // checked copy, so the solution is self-contained
  Matrix p22bar;  // n2 x n2 symmetric
  Matrix s;       // A22 + Delta2 * p22bar, Hurwitz
  ReducedCoefficients coeffs;
  ReducedDre p11bar;
  double gamma = 0.0;  // -lambda_max(sym(s)), decay margin of the fast flow
  double p0 = 0.0;

  Matrix p11_at(double t) const { return p11bar.at(t); }
  Matrix p12_at(double t) const;
};

/// Stabilizing solution of A22^T P + P A22 + P Delta2 P + Q2 = 0 via the
/// stable invariant subspace of the Hamiltonian [[A22, Delta2], [-Q2,
/// -A22^T]], refined by one Newton defect-correction step.  Returns
/// (P22bar, S).  Throws Delta2SingularError ("3.1") and
/// NoStabilizingSolutionError ("3.2b": eigenvalues within 1e-10 of the
/// imaginary axis, wrong stable dimension, singular subspace upper block, or
/// residual that will not certify).  Never forms or factors a matrix larger
/// than 2 n2 x 2 n2.
std::pair<Matrix, Matrix> solve_reduced_are(const GameSpec& spec);

/// Kleinman-type Newton iteration for the same equation from a caller-chosen
/// symmetric initial guess; converges quadratically inside the stabilizing
/// root's attraction region.  Throws NoStabilizingSolutionError on
/// divergence or non-convergence.
Matrix newton_refine_are(const GameSpec& spec, const Matrix& guess,
                         int max_iters = 50, double tol = 1e-13);

/// The four displayed coefficient matrices.  `p22bar` must be the
/// stabilizing root; it is used to cross-check Lambda against
/// S^T Delta2^{-1} S.  Throws LambdaSingularError ("3.2b").
ReducedCoefficients reduced_coefficients(const GameSpec& spec,
                                         const Matrix& p22bar);

/// Backward integration of the reduced slow equation (state dimension n1^2,
/// no stiffness).  Throws BlowUpError with t_escape in forward time when the
/// slow flow escapes inside the horizon.
ReducedDre solve_reduced_dre(const GameSpec& spec,
                             const ReducedCoefficients& coeffs,
                             const OdeTolerance& tol = {});

/// Mixed block from the slow block:
///   P12bar = -(A21^T P22bar + P11 A12 + P11 Delta P22bar) S^{-1}.
Matrix p12_bar(const Matrix& p11_at_t, const Matrix& p22bar,
               const GameSpec& spec);

/// Full reduced pipeline: ARE, coefficients, slow DRE, stability margin.
ReducedSolution solve_reduced(const GameSpec& spec, const OdeTolerance& tol = {});

/// Max Frobenius residuals of the three reduced-system equations over the
/// slow grid (nodes and midpoints): slow differential block, mixed algebraic
/// block, fast algebraic block.
struct ReducedResiduals {
  double res6a = 0.0;
  double res6b = 0.0;
  double res6c = 0.0;
};
ReducedResiduals verify_reduced_system(const ReducedSolution& rs,
                                       const GameSpec& spec);

/// Constants of the reduced solution as JSON (matrices as arrays of rows).
Json reduced_constants_json(const ReducedSolution& rs);

/// CSV rows "t, vec(P11bar), vec(P12bar)" (row-major) over the slow grid.
void write_reduced_csv(const ReducedSolution& rs, std::ostream& os);

}  // namespace sfg
