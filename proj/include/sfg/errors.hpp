#pragma once

#include <stdexcept>
#include <string>

namespace sfg {

/// Base class for every failure raised by the solvers, the simulation engine
/// and the I/O layer, so callers can catch a single type.
struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A game specification (or an argument derived from one) is malformed:
/// wrong shapes, non-finite entries, non-positive horizon, out-of-range eps.
struct SpecError : SolveError {
  using SolveError::SolveError;
};

/// A model hypothesis required by the requested computation does not hold.
/// `id` is the certificate code used in reports and CLI error output:
///   "3.1"  fast control-weight block Delta2 invertible,
///   "3.2a" slow Riccati flow bounded on the horizon,
///   "3.2b" stabilizing algebraic solution for the fast block exists,
///   "4.1"  closed-loop fast matrix has a uniform decay margin,
///   "4.2"  layer initial data lies inside the certified attraction ball.
struct AssumptionError : SolveError {
  std::string id;
  AssumptionError(std::string id_, const std::string& what)
      : SolveError(what), id(std::move(id_)) {}
};

struct Delta2SingularError : AssumptionError {
  explicit Delta2SingularError(const std::string& what)
      : AssumptionError("3.1", what) {}
};

struct NoStabilizingSolutionError : AssumptionError {
  explicit NoStabilizingSolutionError(const std::string& what)
      : AssumptionError("3.2b", what) {}
};

struct LambdaSingularError : AssumptionError {
  explicit LambdaSingularError(const std::string& what)
      : AssumptionError("3.2b", what) {}
};

/// A trajectory left the admissible region: an entry crossed the blow-up
/// threshold or became non-finite.  `t_escape` is the time (in the caller's
/// time variable) of the last accepted point before the failure.
struct BlowUpError : SolveError {
  double t_escape;
  BlowUpError(double t, const std::string& what)
      : SolveError(what), t_escape(t) {}
};

/// The adaptive integrator ran out of budget: the step size underflowed the
/// floor or the step count limit was reached before the end of the interval.
struct StepLimitError : SolveError {
  using SolveError::SolveError;
};

/// A layer trajectory escaped its certified decay envelope by more than the
/// allowed numerical slack.  `tau` is the stretched time of the violation.
struct EnvelopeViolatedError : SolveError {
  double tau;
  EnvelopeViolatedError(double tau_, const std::string& what)
      : SolveError(what), tau(tau_) {}
};

/// A feedback law of one kind was requested from a solution of another kind.
struct KindMismatchError : SolveError {
  using SolveError::SolveError;
};

/// Two solution objects that must share a horizon or cover each other's
/// domain (full vs. reduced vs. layer) do not.
struct GridMismatchError : SolveError {
  using SolveError::SolveError;
};

/// A scalar-only routine was called on a spec with a dimension above one.
struct NotScalarError : SolveError {
  using SolveError::SolveError;
};

/// A closed-form routine was called outside the parameter region where the
/// formula is valid.
struct ConditionFailedError : SolveError {
  using SolveError::SolveError;
};

/// A regression was requested on fewer than the minimum number of points.
struct InsufficientPointsError : SolveError {
  using SolveError::SolveError;
};

/// A simulated path crossed the state blow-up guard.
struct PathBlowUpError : SolveError {
  long path;
  double t;
  PathBlowUpError(long path_, double t_, const std::string& what)
      : SolveError(what), path(path_), t(t_) {}
};

/// The simulation step exceeds the stability budget tied to the time-scale
/// ratio.
struct StepTooLargeError : SolveError {
  using SolveError::SolveError;
};

}  // namespace sfg
