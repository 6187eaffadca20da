#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "sfg/boundary.hpp"
#include "sfg/game_spec.hpp"
#include "sfg/io.hpp"
#include "sfg/ode.hpp"
#include "sfg/reduced.hpp"
#include "sfg/riccati.hpp"

namespace sfg {

/// Error measurements comparing one full solution against the reduced and
/// boundary-layer descriptions:
///   err_P11       = sup_t |P11(t) - P11bar(t)|_F
///   err_P12       = sup_t |P12(t) - P12bar(t) - P12hat((T-t)/eps)|_F
///   err_P22       = sup_t |P22(t) - P22bar   - P22hat((T-t)/eps)|_F
///   err_assembled = sup_t |P(t) - diag(P11bar(t), 0)|_F
///   l2_gaps[i]    = integral of |Fhat_ij - Fbar_ij|_F^2 dt in the order
///                   (1,1), (1,2), (2,1), (2,2).
struct TikhonovReport {
  double eps = 0.0;
  double err_P11 = 0.0;
  double err_P12 = 0.0;
  double err_P22 = 0.0;
  double err_assembled = 0.0;
  std::array<double, 4> l2_gaps{};
};

/// Log-log least-squares fit of error against eps.
struct RateFit {
  std::vector<double> eps_values;  // decreasing; only the points fitted
  std::vector<double> errors;      // matching strictly positive errors
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> excluded_eps;  // points dropped because error <= 0
};

/// Sup norms are sampled on the union of the full solution's grid and
/// n_uniform uniform points in [0, T]; layer terms are evaluated at
/// tau = (T - t)/eps through the layer interpolant.  Throws
/// GridMismatchError when the inputs disagree on dimensions or horizon, or
/// when the layer solution does not reach tau = T/eps.
TikhonovReport tikhonov_errors(const RiccatiSolution& full,
                               const ReducedSolution& red,
                               const BoundaryLayerSolution& bl,
                               const GameSpec& spec, int n_uniform = 200);

/// The four feedback-gain L2 gaps, trapezoid quadrature on the merged
/// full/reduced grid; order (1,1), (1,2), (2,1), (2,2).
std::array<double, 4> l2_feedback_gap(const RiccatiSolution& full,
                                      const ReducedSolution& red,
                                      const GameSpec& spec);

/// Integrals of |P12(t) - P12bar(t)|_F^j and |P22(t) - P22bar|_F^j over
/// [0, T] (no layer terms), returned in that order.  Requires j >= 1.
std::pair<double, double> corollary44_integrals(const RiccatiSolution& full,
                                                const ReducedSolution& red,
                                                const GameSpec& spec, int j);

/// Least-squares line on (ln eps, ln err).  Zero/negative errors are
/// excluded from the fit and reported in excluded_eps; fewer than 3
/// remaining points raise InsufficientPointsError.
RateFit fit_rate(const std::vector<std::pair<double, double>>& sweep);

/// One sweep point: the Tikhonov report plus the two corollary integrals at
/// j = 1 and j = 2 and the value gap |V_eps - Vbar| at the sweep's x0.
struct SweepPoint {
  TikhonovReport report;
  std::pair<double, double> cor44_j1{};
  std::pair<double, double> cor44_j2{};
  double value_gap = 0.0;
};

struct SweepOptions {
  std::vector<double> eps_list;  // empty -> {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}
  OdeTolerance tol{};
  std::optional<double> delta;  // layer split parameter; default selection
  Vector x01, x02;              // empty -> all-ones initial state
};

struct SweepResult {
  std::vector<SweepPoint> points;  // ordered by decreasing eps
};

extern const std::vector<double> kDefaultSweepEps;

/// Solves the reduced pair and boundary layer once, then one full solution
/// per eps, collecting error reports ordered by decreasing eps.
SweepResult run_sweep(const GameSpec& spec, const SweepOptions& options = {});

/// CSV with columns
///   eps,err_P11,err_P12,err_P22,err_assembled,gap_11,gap_12,gap_21,gap_22
void write_sweep_csv(const SweepResult& sweep, std::ostream& os);

/// Fitted slopes for every error series in the sweep (the four sup errors,
/// the four gain gaps, the four corollary integrals, and the value gap).
Json sweep_slopes_json(const SweepResult& sweep);

}  // namespace sfg
