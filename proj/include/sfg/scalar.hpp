#pragma once

#include <optional>
#include <utility>

#include "sfg/game_spec.hpp"

namespace sfg {

/// Coefficients of the scalar slow Riccati equation
///   dP/dt + 2*a_tilde*P + m*P^2 + n = 0,  P(T) = 0,
/// obtained from the one-dimensional closed-form reduction of the game data.
struct ScalarCoefficients {
  double a_tilde = 0.0;
  double m = 0.0;
  double n = 0.0;
};

/// Open interval; endpoints may be infinite, NaN marks "undefined".
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Solvability certificates for the one-dimensional case.
///   cond_dre_a : a_tilde^2 - m*n >= 0
///   cond_dre_b : a_tilde - sqrt(|a_tilde^2 - m*n|) <= 0
///   cond_are   : delta2 * Q2 < 0
/// cond_dre_a OR cond_dre_b is the exact solvability predicate for the
/// reduced slow equation; cond_are guarantees a stabilizing root for the
/// fast algebraic equation.  region_lo_hi is the maximal limiting region of
/// attraction around the stabilizing root, with boundary -2S/delta2 where
/// S is the closed-loop fast coefficient.
struct ScalarConditions {
  bool cond_dre_a = false;
  bool cond_dre_b = false;
  bool cond_are = false;
  Interval region_lo_hi;
  ScalarCoefficients coeffs;  // the reduction behind the DRE conditions
};

/// Closed-form scalar reduction (all dimensions 1).  Throws NotScalarError,
/// Delta2SingularError ("3.1"), LambdaSingularError ("3.2b" — the reduction
/// denominator A22^2 - delta2*Q2 vanishes).
ScalarCoefficients scalar_reduction(const GameSpec& spec);

ScalarConditions scalar_conditions(const GameSpec& spec);

/// Roots of delta2*P^2 + 2*A22*P + Q2 = 0 as (stabilizing, unstable):
///   stab   = (-A22 - sqrt(A22^2 - delta2*Q2)) / delta2,
///   unstab = (-A22 + sqrt(A22^2 - delta2*Q2)) / delta2,
/// so A22 + delta2*stab = -sqrt(disc) < 0.  Requires cond_are; throws
/// ConditionFailedError otherwise.
std::pair<double, double> scalar_are_roots(const GameSpec& spec);

/// Closed-form value P(t) of the scalar slow Riccati equation with the given
/// coefficients on [0, spec.T].  Covers the three regimes (distinct real
/// roots, double root, complex pair) with separate formulas; the double-root
/// case uses the rational form.  Throws ConditionFailedError when neither
/// DRE condition holds for `coeffs`, BlowUpError (t_escape in forward time)
/// when the solution escapes between t and T, NotScalarError, SpecError for
/// t beyond the horizon.
double scalar_dre_oracle(const GameSpec& spec, const ScalarCoefficients& coeffs,
                         double t);

/// Backward time s* = T - t* at which the solution started from zero
/// terminal data escapes, if it does: horizons longer than s* blow up.
std::optional<double> scalar_dre_escape(const ScalarCoefficients& coeffs);

}  // namespace sfg
