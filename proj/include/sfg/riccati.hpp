#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "sfg/game_spec.hpp"
#include "sfg/matrix.hpp"
#include "sfg/ode.hpp"

namespace sfg {

/// Right-hand-side polynomials of the three coupled Riccati block equations
/// in first-order form.  With P^eps = [[P11, eps P12], [eps P12^T, eps P22]],
/// the backward flow is
///   dP11/dt + slow = 0,   eps dP12/dt + fast12 = 0,   eps dP22/dt + fast22 = 0,
/// all with zero terminal data.  `slow` and `fast22` are symmetric (the
/// implementation symmetrizes them so the flow preserves symmetry exactly).
/// At eps = 0 the same polynomials define the reduced and layer systems.
struct FullRhs {
  Matrix slow;    // n1 x n1
  Matrix fast12;  // n1 x n2
  Matrix fast22;  // n2 x n2
};

FullRhs full_rhs(const GameSpec& spec, const DeltaBlocks& d, const Matrix& p11,
                 const Matrix& p12, const Matrix& p22, double eps);

/// Backward solution of the full three-block system on [0, T].  Internally
/// the solver works in the reversed time s = T - t; the public interface is
/// entirely in t.
class RiccatiSolution {
 public:
  double eps = 0.0;
  double T = 0.0;
  int n1 = 0, n2 = 0;

  /// Strictly increasing, grid.front() == 0 and grid.back() == T.  These are
  /// the accepted integrator nodes unless an output grid was requested.
  std::vector<double> grid;
  std::vector<Matrix> P11, P12, P22;  // one block triple per grid point

  struct Blocks {
    Matrix P11, P12, P22;
  };
  /// Dense evaluation anywhere in [0, T]; node hits reproduce stored values.
  Blocks at(double t) const;
  /// d/dt of the dense representation.
  Blocks derivative_at(double t) const;

  Matrix p11_at(double t) const { return at(t).P11; }
  Matrix p12_at(double t) const { return at(t).P12; }
  Matrix p22_at(double t) const { return at(t).P22; }

  /// Accepted internal nodes in t (always available, independent of any
  /// requested output grid).
  const std::vector<double>& internal_grid() const { return internal_grid_; }

  // Internal dense representation in s = T - t; populated by solve_full.
  OdeTrajectory traj_s;
  std::vector<double> internal_grid_;

 private:
  Blocks unpack(const Vector& y) const;
};

/// Integrate the full system at time-scale ratio eps in (0, 1] with the
/// adaptive embedded pair.  For eps < 1e-2 the terminal window
/// [T - 50 eps ln 10, T] (where the fast blocks relax) is integrated under a
/// step cap of eps/20 before the usual controller takes over.  Throws
/// BlowUpError with t_escape in t-time, StepLimitError, SpecError.
RiccatiSolution solve_full(
    const GameSpec& spec, double eps, const OdeTolerance& tol = {},
    const std::optional<std::vector<double>>& output_grid = std::nullopt);

/// Assembled n x n matrix [[P11, eps P12], [eps P12^T, eps P22]] at time t.
Matrix assemble_P(const RiccatiSolution& sol, double t);

/// Maximum Frobenius norm over internal nodes and interval midpoints of the
/// assembled-equation residual
///   dP/dt + A^T P + P A - P B R^{-1} B^T P + Q,
/// with dP/dt taken from the dense interpolant.  This cross-checks the
/// blockwise integration against the single-equation form.
double riccati_residual(const RiccatiSolution& sol, const GameSpec& spec);

/// CSV rows "t, vec(P11), vec(P12), vec(P22)" (row-major blocks) over grid.
void write_trajectory_csv(const RiccatiSolution& sol, std::ostream& os);

}  // namespace sfg
