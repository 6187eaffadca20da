#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "sfg/matrix.hpp"
#include "sfg/ode.hpp"
#include "sfg/reduced.hpp"

namespace sfg {

/// Terminal-layer correction trajectories in stretched time tau = (T - t)/eps,
/// integrated forward from (-h(0), -P22bar), together with the decay
/// certificate: margin gamma, split parameter delta in (0, gamma), certified
/// ball radius q2, and the envelope constants k1, k2 with
///   |P12hat(tau)| <= k1 e^{-gamma tau} |P12hat(0)| + k2 e^{-(gamma-delta) tau},
///   |P22hat(tau)| <= e^{-(gamma-delta) tau} |P22hat(0)|
/// (Frobenius norms of the trajectory, operator norms inside the constants).
class BoundaryLayerSolution {
 public:
  int n1 = 0, n2 = 0;
  std::vector<double> tau_grid;  // 0 = tau_0 < ... < tau_K = tau_max
  std::vector<Matrix> P12hat, P22hat;

  double gamma = 0.0, delta = 0.0, q2 = 0.0, k1 = 0.0, k2 = 0.0;
  double p12hat0_norm = 0.0, p22hat0_norm = 0.0;  // Frobenius at tau = 0

  OdeTrajectory traj_tau;

  Matrix p12hat_at(double tau) const;
  Matrix p22hat_at(double tau) const;

  /// Envelope right-hand sides at tau.
  double envelope12(double tau) const;
  double envelope22(double tau) const;
};

/// Affine map sending a slow block to the matching mixed block:
///   h(P11) = -(A21^T P22bar + P11 A12 + P11 Delta P22bar) S^{-1};
/// h(P11bar(t)) reproduces the reduced mixed block pointwise.
Matrix h_map(const Matrix& p11, const Matrix& p22bar, const GameSpec& spec);

/// Phi(P11) = A21^T + P11 Delta + h(P11) Delta2; its norm at zero enters the
/// mixed-block envelope constant.
Matrix phi_map(const Matrix& p11, const GameSpec& spec, const Matrix& p22bar);

/// Decay margin gamma = -lambda_max(sym(S)) of the closed-loop fast matrix.
/// Throws AssumptionError("4.1") when gamma <= 1e-12.
double gamma_margin(const GameSpec& spec, const Matrix& p22bar);

struct AttractionCheck {
  bool ok = false;
  double q2 = 0.0;
};

/// Conservative attraction-ball certificate: q2 = (gamma + delta)/|Delta2|_2
/// (any symmetric perturbation of Frobenius norm below q2 keeps the
/// closed-loop symmetric part below delta*I), ok when |P22bar|_F < q2.
/// Throws SpecError when delta is outside (0, gamma).
AttractionCheck attraction_check(const GameSpec& spec, const Matrix& p22bar,
                                 double delta);

/// Split-parameter selection: the requested value is validated as-is; with
/// none requested, gamma/2 is tried first and, if the ball certificate fails
/// there, delta is bisected upward toward 0.99*gamma (the ball grows with
/// delta).  Throws AssumptionError("4.2") when no delta certifies.
double select_delta(const GameSpec& spec, const Matrix& p22bar,
                    std::optional<double> requested = std::nullopt);

/// Integrate the layer system
///   dP12hat/dtau = P12hat S + Phi(0) P22hat + P12hat Delta2 P22hat,
///   dP22hat/dtau = S^T P22hat + P22hat S + P22hat Delta2 P22hat
/// to tau_max, certifying assumptions 4.1-4.2 first and checking both decay
/// envelopes at every accepted node (violations beyond 10x the integration
/// tolerance raise EnvelopeViolatedError — never expected for certified
/// data).  The absolute error target is floored at 1e-18 regardless of tol,
/// and once the state contracts below roundoff relative to its initial size
/// the stored tail is exactly zero, so node norms decay monotonically all
/// the way down instead of plateauing at an integrator noise floor.
BoundaryLayerSolution solve_boundary_layer(const GameSpec& spec,
                                           const ReducedSolution& rs,
                                           double delta, double tau_max,
                                           const OdeTolerance& tol = {});

/// max(T/eps, 60/(gamma - delta)): long enough for both the stretched
/// horizon and full decay.  Throws SpecError on non-positive inputs or
/// delta >= gamma.
double default_tau_max(double eps, double T, double gamma, double delta);

/// CSV rows "tau, vec(P12hat), vec(P22hat), env12, env22" over tau_grid.
void write_boundary_csv(const BoundaryLayerSolution& bl, std::ostream& os);

}  // namespace sfg
