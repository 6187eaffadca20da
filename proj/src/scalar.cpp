#include "sfg/scalar.hpp"

#include <cmath>
#include <limits>

#include "sfg/errors.hpp"
#include "sfg/io.hpp"

namespace sfg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_scalar(const GameSpec& spec) {
  if (spec.n1 != 1 || spec.n2 != 1 || spec.k1 != 1 || spec.k2 != 1 ||
      spec.m1 != 1 || spec.m2 != 1)
    throw NotScalarError("scalar routine called on a nonscalar spec");
}

struct ScalarData {
  double a11, a12, a21, a22, q1, q2;
  double d1, d, d2;    // control-weight combinations
  double denom;        // a22^2 - d2*q2
};

ScalarData scalar_data(const GameSpec& spec) {
  require_scalar(spec);
  ScalarData s{};
  s.a11 = spec.A11(0, 0);
  s.a12 = spec.A12(0, 0);
  s.a21 = spec.A21(0, 0);
  s.a22 = spec.A22(0, 0);
  s.q1 = spec.Q1(0, 0);
  s.q2 = spec.Q2(0, 0);
  const double b11 = spec.B11(0, 0), b12 = spec.B12(0, 0);
  const double b21 = spec.B21(0, 0), b22 = spec.B22(0, 0);
  s.d1 = b11 * b11 - b12 * b12;
  s.d = b11 * b21 - b12 * b22;
  s.d2 = b21 * b21 - b22 * b22;

  const double d2_scale = std::max(b21 * b21 + b22 * b22, 1e-300);
  if (std::abs(s.d2) <= 1e-10 * d2_scale)
    throw Delta2SingularError(
        "fast control-weight combination delta2 = " + format_double(s.d2) +
        " is singular relative to |B21|^2 + |B22|^2 = " +
        format_double(b21 * b21 + b22 * b22));

  s.denom = s.a22 * s.a22 - s.d2 * s.q2;
  const double denom_scale =
      std::max({s.a22 * s.a22, std::abs(s.d2 * s.q2), 1e-300});
  if (std::abs(s.denom) <= 1e-10 * denom_scale)
    throw LambdaSingularError(
        "scalar reduction denominator A22^2 - delta2*Q2 = " +
        format_double(s.denom) + " vanishes");
  return s;
}

}  // namespace

ScalarCoefficients scalar_reduction(const GameSpec& spec) {
  const ScalarData s = scalar_data(spec);
  ScalarCoefficients c;
  c.a_tilde = s.a11 + (s.d * s.q2 * s.a21 - s.a12 * s.a21 * s.a22) / s.denom;
  c.m = s.d1 + (s.d2 * s.a12 * s.a12 - 2.0 * s.d * s.a12 * s.a22 +
                s.d * s.d * s.q2) /
                   s.denom;
  c.n = s.q1 + s.q2 * s.a21 * s.a21 / s.denom;
  return c;
}

ScalarConditions scalar_conditions(const GameSpec& spec) {
  const ScalarData s = scalar_data(spec);
  ScalarConditions out;
  out.coeffs = scalar_reduction(spec);

  const double disc_dre =
      out.coeffs.a_tilde * out.coeffs.a_tilde - out.coeffs.m * out.coeffs.n;
  out.cond_dre_a = disc_dre >= 0.0;
  out.cond_dre_b = out.coeffs.a_tilde - std::sqrt(std::abs(disc_dre)) <= 0.0;
  out.cond_are = s.d2 * s.q2 < 0.0;

  const double disc_are = s.denom;  // a22^2 - d2*q2
  if (disc_are >= 0.0) {
    // Closed-loop fast coefficient at the stabilizing root is -sqrt(disc);
    // the attraction region's limiting boundary is -2S/delta2.
    const double boundary = 2.0 * std::sqrt(disc_are) / s.d2;
    if (s.d2 < 0.0)
      out.region_lo_hi = {boundary, kInf};
    else
      out.region_lo_hi = {-kInf, boundary};
  } else {
    out.region_lo_hi = {kNaN, kNaN};
  }
  return out;
}

std::pair<double, double> scalar_are_roots(const GameSpec& spec) {
  const ScalarData s = scalar_data(spec);
  // delta2*Q2 < 0 is the certificate; the boundary case delta2*Q2 = 0 still
  // factorizes with A22 + delta2*stab = -|A22| <= 0 and is accepted.
  if (!(s.d2 * s.q2 <= 0.0))
    throw ConditionFailedError(
        "stabilizing fast root requires delta2*Q2 <= 0, got " +
        format_double(s.d2 * s.q2));
  const double sq = std::sqrt(s.denom);
  return {(-s.a22 - sq) / s.d2, (-s.a22 + sq) / s.d2};
}

std::optional<double> scalar_dre_escape(const ScalarCoefficients& c) {
  if (c.n == 0.0) return std::nullopt;  // P stays at the zero equilibrium
  if (c.m == 0.0) return std::nullopt;  // linear flow: growth, never escape
  const double disc = c.a_tilde * c.a_tilde - c.m * c.n;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    const double r1 = (-c.a_tilde + sq) / c.m;
    const double r2 = (-c.a_tilde - sq) / c.m;
    const double ratio = r1 / r2;
    // The pole requires the exponential factor to reach r2/r1 > 1.
    if (ratio > 0.0 && ratio < 1.0) return std::log(1.0 / ratio) / (2.0 * sq);
    return std::nullopt;
  }
  if (disc == 0.0) {
    // P = m s r^2 / (1 + m r s) with double root r = -a/m; the denominator
    // 1 - a_tilde*s hits zero only for a_tilde > 0.
    if (c.a_tilde > 0.0) return 1.0 / c.a_tilde;
    return std::nullopt;
  }
  // Complex pair: tangent solution, escape is unavoidable.
  const double cc = std::sqrt(-disc) / std::abs(c.m);
  const double phi0 = std::atan(c.a_tilde / c.m / cc);
  const double rate = cc * c.m;
  const double target = c.m > 0.0 ? std::asin(1.0) : -std::asin(1.0);
  return (target - phi0) / rate;
}

namespace {

// Value at backward time s (escape-free range guaranteed by the caller).
double dre_value(const ScalarCoefficients& c, double s) {
  if (s == 0.0 || c.n == 0.0) return 0.0;
  if (c.m == 0.0) {
    if (c.a_tilde == 0.0) return c.n * s;
    return c.n / (2.0 * c.a_tilde) * std::expm1(2.0 * c.a_tilde * s);
  }
  const double disc = c.a_tilde * c.a_tilde - c.m * c.n;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    const double r1 = (-c.a_tilde + sq) / c.m;
    const double r2 = (-c.a_tilde - sq) / c.m;
    const double w = (r1 / r2) * std::exp(2.0 * sq * s);
    // IEEE semantics give the r2 limit automatically when w overflows.
    return r2 + (r1 - r2) / (1.0 - w);
  }
  if (disc == 0.0) {
    const double r = -c.a_tilde / c.m;
    return c.m * s * r * r / (1.0 + c.m * r * s);
  }
  const double cc = std::sqrt(-disc) / std::abs(c.m);
  const double phi0 = std::atan(c.a_tilde / c.m / cc);
  return cc * std::tan(cc * c.m * s + phi0) - c.a_tilde / c.m;
}

}  // namespace

double scalar_dre_oracle(const GameSpec& spec, const ScalarCoefficients& coeffs,
                         double t) {
  require_scalar(spec);
  const double T = spec.T;
  double s = T - t;
  if (s < -1e-12 * std::max(1.0, std::abs(T)))
    throw SpecError("scalar_dre_oracle: t = " + format_double(t) +
                    " lies beyond the horizon T = " + format_double(T));
  if (s < 0.0) s = 0.0;

  const double disc = coeffs.a_tilde * coeffs.a_tilde - coeffs.m * coeffs.n;
  const bool cond_a = disc >= 0.0;
  const bool cond_b = coeffs.a_tilde - std::sqrt(std::abs(disc)) <= 0.0;
  if (!cond_a && !cond_b)
    throw ConditionFailedError(
        "scalar_dre_oracle: neither solvability condition holds "
        "(a_tilde = " +
        format_double(coeffs.a_tilde) + ", m = " + format_double(coeffs.m) +
        ", n = " + format_double(coeffs.n) + ")");

  const auto esc = scalar_dre_escape(coeffs);
  if (esc && s >= *esc) {
    const double t_escape = T - *esc;
    throw BlowUpError(t_escape,
                      "scalar slow Riccati solution escapes at t = " +
                          format_double(t_escape) + " (backward time " +
                          format_double(*esc) + ")");
  }
  return dre_value(coeffs, s);
}

}  // namespace sfg
