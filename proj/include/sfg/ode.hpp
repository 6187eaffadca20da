#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "sfg/matrix.hpp"

namespace sfg {

/// Mixed absolute/relative error target for the adaptive integrator.  The
/// per-component scale is abs + rel * max(|y_old|, |y_new|).
struct OdeTolerance {
  double rel = 1e-8;
  double abs = 1e-10;
};

/// Hook applied to each accepted state.  It may adjust y in place (the
/// Riccati flows re-symmetrize their matrix blocks here); returning false
/// rejects the step, which is retried with half the size.
using PostStep = std::function<bool(double t, Vector& y)>;

struct OdeOptions {
  OdeTolerance tol;
  /// Hard cap on the step size everywhere (0 disables).
  double max_step = 0.0;
  /// Extra cap active while t < cap_until; used to force resolution of an
  /// initial fast transient.
  double cap_step = 0.0;
  double cap_until = -std::numeric_limits<double>::infinity();
  /// Any |y_i| above this raises BlowUpError.
  double blowup_threshold = 1e12;
  /// Steps below step_floor_rel * (t_end - t_begin) raise StepLimitError.
  double step_floor_rel = 1e-14;
  long max_steps = 10'000'000;
  PostStep post_step;
};

/// Accepted mesh with states and derivatives; evaluation between nodes is
/// cubic Hermite, which reproduces node states and node derivatives exactly
/// and carries an O(h^3) interpolation error compatible with the embedded
/// pair's tolerance range.
class OdeTrajectory {
 public:
  std::vector<double> t;
  std::vector<Vector> y;
  std::vector<Vector> dy;

  double t_begin() const { return t.front(); }
  double t_end() const { return t.back(); }

  /// State at time s (s within [t_begin, t_end] up to 1e-9 relative slack;
  /// node hits return the stored vectors bit-for-bit).
  Vector value_at(double s) const;
  /// Time derivative of the interpolant at s.
  Vector derivative_at(double s) const;

 private:
  std::size_t interval_index(double& s) const;
};

struct OdeStats {
  long n_steps = 0;     // accepted
  long n_rejected = 0;  // error-controller and post-step rejections
  long n_rhs = 0;
};

struct OdeResult {
  OdeTrajectory trajectory;
  OdeStats stats;
};

using OdeRhs = std::function<void(double t, const Vector& y, Vector& dydt)>;

/// Integrate dy/dt = rhs(t, y) from t0 to t1 (t1 > t0) with the
/// Dormand-Prince 5(4) embedded pair under PI step-size control.
/// Throws BlowUpError (t_escape = last accepted time) and StepLimitError.
OdeResult integrate(const OdeRhs& rhs, double t0, double t1, const Vector& y0,
                    const OdeOptions& options);

}  // namespace sfg
