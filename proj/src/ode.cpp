#include "sfg/ode.hpp"

#include <algorithm>
#include <cmath>

#include "sfg/errors.hpp"

namespace sfg {

namespace {

// Dormand-Prince 5(4) tableau.  The 5th-order weights equal the last stage
// row; e[] are the differences against the embedded 4th-order weights.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

// PI controller constants in the Hairer-Norsett-Wanner arrangement.
constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kMaxShrink = 5.0;   // new step >= h / 5
constexpr double kMaxGrow = 10.0;    // new step <= 10 h

double error_norm(const Vector& err, const Vector& y0, const Vector& y1,
                  const OdeTolerance& tol) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double scale =
        tol.abs + tol.rel * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double q = err[i] / scale;
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

}  // namespace

std::size_t OdeTrajectory::interval_index(double& s) const {
  const double span = t.back() - t.front();
  const double slack = 1e-9 * std::max(1.0, std::abs(span));
  if (s < t.front() - slack || s > t.back() + slack)
    throw SolveError("time " + std::to_string(s) +
                     " outside trajectory range [" + std::to_string(t.front()) +
                     ", " + std::to_string(t.back()) + "]");
  s = std::clamp(s, t.front(), t.back());
  // First node with t[k] >= s, then step back to the interval start.
  const auto it = std::lower_bound(t.begin(), t.end(), s);
  std::size_t k = static_cast<std::size_t>(it - t.begin());
  if (k > 0) --k;
  if (k + 1 >= t.size()) k = t.size() - 2;
  return k;
}

Vector OdeTrajectory::value_at(double s) const {
  if (t.size() == 1) return y.front();
  const std::size_t k = interval_index(s);
  if (s == t[k]) return y[k];
  if (s == t[k + 1]) return y[k + 1];
  const double h = t[k + 1] - t[k];
  const double th = (s - t[k]) / h;
  const double th2 = th * th, th3 = th2 * th;
  const double h00 = 2 * th3 - 3 * th2 + 1;
  const double h10 = th3 - 2 * th2 + th;
  const double h01 = -2 * th3 + 3 * th2;
  const double h11 = th3 - th2;
  return h00 * y[k] + (h10 * h) * dy[k] + h01 * y[k + 1] +
         (h11 * h) * dy[k + 1];
}

Vector OdeTrajectory::derivative_at(double s) const {
  if (t.size() == 1) return dy.front();
  const std::size_t k = interval_index(s);
  if (s == t[k]) return dy[k];
  if (s == t[k + 1]) return dy[k + 1];
  const double h = t[k + 1] - t[k];
  const double th = (s - t[k]) / h;
  const double th2 = th * th;
  const double g00 = (6 * th2 - 6 * th) / h;
  const double g10 = 3 * th2 - 4 * th + 1;
  const double g01 = (-6 * th2 + 6 * th) / h;
  const double g11 = 3 * th2 - 2 * th;
  return g00 * y[k] + g10 * dy[k] + g01 * y[k + 1] + g11 * dy[k + 1];
}

OdeResult integrate(const OdeRhs& rhs, double t0, double t1, const Vector& y0,
                    const OdeOptions& options) {
  if (!(t1 > t0)) throw SolveError("integrate: need t1 > t0");
  const Eigen::Index dim = y0.size();
  const double interval = t1 - t0;
  const double step_floor = options.step_floor_rel * interval;

  OdeResult result;
  OdeStats& stats = result.stats;
  OdeTrajectory& traj = result.trajectory;

  Vector y = y0;
  Vector f0(dim), k2v(dim), k3v(dim), k4v(dim), k5v(dim), k6v(dim), k7v(dim);
  Vector ytmp(dim), ynew(dim), errv(dim);

  const auto check_state = [&](const Vector& v, double t_last) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double a = v[i];
      if (!std::isfinite(a) || std::abs(a) > options.blowup_threshold)
        throw BlowUpError(t_last, "trajectory escaped at t > " +
                                      std::to_string(t_last));
    }
  };

  double t = t0;
  rhs(t, y, f0);
  ++stats.n_rhs;
  check_state(y, t);
  traj.t.push_back(t);
  traj.y.push_back(y);
  traj.dy.push_back(f0);

  const auto capped = [&](double h) {
    if (options.max_step > 0.0) h = std::min(h, options.max_step);
    if (options.cap_step > 0.0 && t < options.cap_until)
      h = std::min(h, options.cap_step);
    return std::min(h, t1 - t);
  };

  // Initial step: the classical two-evaluation estimate, clipped to the caps.
  double h;
  {
    double d0 = 0.0, d1 = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double scale = options.tol.abs + options.tol.rel * std::abs(y[i]);
      d0 += std::pow(y[i] / scale, 2);
      d1 += std::pow(f0[i] / scale, 2);
    }
    d0 = std::sqrt(d0 / static_cast<double>(dim));
    d1 = std::sqrt(d1 / static_cast<double>(dim));
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * interval
                                         : 0.01 * (d0 / d1);
    h0 = std::min(h0, interval);
    ytmp = y + h0 * f0;
    rhs(t + h0, ytmp, k2v);
    ++stats.n_rhs;
    double d2 = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double scale = options.tol.abs + options.tol.rel * std::abs(y[i]);
      d2 += std::pow((k2v[i] - f0[i]) / scale, 2);
    }
    d2 = std::sqrt(d2 / static_cast<double>(dim)) / h0;
    const double d_max = std::max(d1, d2);
    const double h1 = (d_max <= 1e-15)
                          ? std::max(1e-6 * interval, h0 * 1e-3)
                          : std::pow(0.01 / d_max, 0.2);
    h = std::min(100.0 * h0, h1);
  }
  h = capped(std::max(h, step_floor));

  double err_prev = 1e-4;  // memory term of the PI controller
  bool just_rejected = false;

  while (t < t1) {
    if (stats.n_steps + stats.n_rejected >= options.max_steps)
      throw StepLimitError("step budget exhausted at t = " + std::to_string(t));
    if (h < step_floor)
      throw StepLimitError("step size underflow at t = " + std::to_string(t));
    h = capped(h);

    // Stages.
    ytmp = y + h * (a21 * f0);
    rhs(t + c2 * h, ytmp, k2v);
    ytmp = y + h * (a31 * f0 + a32 * k2v);
    rhs(t + c3 * h, ytmp, k3v);
    ytmp = y + h * (a41 * f0 + a42 * k2v + a43 * k3v);
    rhs(t + c4 * h, ytmp, k4v);
    ytmp = y + h * (a51 * f0 + a52 * k2v + a53 * k3v + a54 * k4v);
    rhs(t + c5 * h, ytmp, k5v);
    ytmp = y + h * (a61 * f0 + a62 * k2v + a63 * k3v + a64 * k4v + a65 * k5v);
    rhs(t + h, ytmp, k6v);
    ynew = y + h * (b1 * f0 + b3 * k3v + b4 * k4v + b5 * k5v + b6 * k6v);
    rhs(t + h, ynew, k7v);
    stats.n_rhs += 6;

    bool finite = ynew.allFinite() && k7v.allFinite();
    double err = std::numeric_limits<double>::infinity();
    if (finite) {
      errv = h * (e1 * f0 + e3 * k3v + e4 * k4v + e5 * k5v + e6 * k6v +
                  e7 * k7v);
      err = error_norm(errv, y, ynew, options.tol);
    }

    if (err <= 1.0) {
      double t_new = t + h;
      if (t1 - t_new < step_floor) t_new = t1;  // land exactly on the end

      bool accepted = true;
      if (options.post_step) accepted = options.post_step(t_new, ynew);
      if (!accepted) {
        ++stats.n_rejected;
        h *= 0.5;
        just_rejected = true;
        continue;
      }
      check_state(ynew, t);

      // Derivative at the accepted (possibly filtered) state: stored for the
      // Hermite interpolant and reused as the first stage of the next step.
      rhs(t_new, ynew, f0);
      ++stats.n_rhs;

      t = t_new;
      y.swap(ynew);
      traj.t.push_back(t);
      traj.y.push_back(y);
      traj.dy.push_back(f0);
      ++stats.n_steps;

      const double fac11 = std::pow(std::max(err, 1e-16), kExpo);
      double fac = fac11 / std::pow(err_prev, kBeta);
      fac = std::max(1.0 / kMaxGrow, std::min(kMaxShrink, fac / kSafety));
      double h_new = h / fac;
      if (just_rejected) h_new = std::min(h_new, h);  // no growth right after
      h = h_new;
      err_prev = std::max(err, 1e-4);
      just_rejected = false;
    } else {
      ++stats.n_rejected;
      if (std::isfinite(err)) {
        const double fac11 = std::pow(err, kExpo);
        h /= std::min(kMaxShrink, fac11 / kSafety);
      } else {
        h *= 0.1;
      }
      just_rejected = true;
    }
  }

  return result;
}

}  // namespace sfg
