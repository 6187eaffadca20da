#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <vector>

#include "sfg/game_spec.hpp"
#include "sfg/matrix.hpp"
#include "sfg/reduced.hpp"
#include "sfg/riccati.hpp"

namespace sfg {

/// One evaluation of a feedback strategy pair: u1 = F11 x1 + F12 x2 (the
/// maximiser), u2 = F21 x1 + F22 x2 (the minimiser).
struct GainSet {
  Matrix F11, F12, F21, F22;  // k1 x n1, k1 x n2, k2 x n1, k2 x n2
};

/// Time-indexed state-feedback law.  The exact kind carries the gains of the
/// full-system saddle point,
///   F11 = B11^T P11 + B21^T P12^T,        F12 = eps B11^T P12 + B21^T P22,
///   F21 = -(B12^T P11 + B22^T P12^T),     F22 = -(eps B12^T P12 + B22^T P22),
/// with the blocks evaluated at t; the approximate kind uses the reduced
/// blocks with no eps terms, making F12 and F22 constant.  Queries clamp t
/// to [0, T].
class FeedbackLaw {
 public:
  enum class Kind { exact, approximate };

  Kind kind = Kind::exact;
  int n1 = 0, n2 = 0, k1 = 0, k2 = 0;
  double T = 0.0;

  GainSet at(double t) const;

  std::function<GainSet(double)> eval_;  // receives clamped t
};

/// Build the exact law from a full solution, or the approximate law from a
/// reduced solution.  A kind that does not match the solution type throws
/// KindMismatchError; mismatched dimensions throw SpecError.
FeedbackLaw make_feedback(FeedbackLaw::Kind kind, const RiccatiSolution& full,
                          const GameSpec& spec);
FeedbackLaw make_feedback(FeedbackLaw::Kind kind, const ReducedSolution& red,
                          const GameSpec& spec);

/// The base law with a constant matrix added to one player's gain row
/// [F_i1 F_i2] (player 1 or 2); used for saddle-point probing.
FeedbackLaw perturb_feedback(const FeedbackLaw& base, int player,
                             const Matrix& row_delta);

/// Monte Carlo batch of closed-loop Euler-Maruyama paths.  The per-path cost
/// is the trapezoid-in-time quadrature of the running integrand
///   1/2 [ <Q1 X1, X1> + <Q2 X2, X2> - |u1|^2 + |u2|^2 ].
struct SimBatch {
  double eps = 0.0;
  double h = 0.0;  // actual step: T / n_steps
  long n_steps = 0;
  long n_paths = 0;
  std::uint64_t seed = 0;
  Vector x0_1, x0_2;

  std::vector<double> costs;       // one per path
  std::vector<Vector> terminals;   // one per path (n1 + n2)
  std::vector<double> aux_costs;   // optional completion-of-squares integrals

  /// Optional per-step sup of the batch mean of |X|^2 (moment probe).
  double moment_sup = 0.0;
};

struct SimOptions {
  bool store_terminals = true;
  bool track_moment_sup = false;
  /// When set, also accumulate per path the quadratic functional
  ///   1/2 integral |(G_side - G_ref,side) X|^2 dt
  /// between this law's gains and a reference law's, for the given player.
  const FeedbackLaw* aux_reference = nullptr;
  int aux_player = 2;
};

/// Closed-loop Euler-Maruyama on the coupled slow-fast system: drift rows of
/// the fast block carry 1/eps, its diffusion carries 1/sqrt(eps).  Noise is
/// addressed by (seed, path, step, channel), so batches with equal seeds are
/// coupled pathwise across laws.  Requires h <= eps/10 (StepTooLargeError);
/// a path whose state norm passes 1e9 raises PathBlowUpError.
SimBatch simulate_game(const GameSpec& spec, double eps,
                       const FeedbackLaw& law, const Vector& x01,
                       const Vector& x02, double h, long n_paths,
                       std::uint64_t seed, const SimOptions& options = {});

/// Sample mean and standard error (sample std / sqrt(n)) of per-path costs,
/// reduced by pairwise summation.  stderr is 0 for a single path.
std::pair<double, double> mc_objective(const SimBatch& batch);

/// Same reduction applied to an arbitrary per-path vector.
std::pair<double, double> mean_stderr(const std::vector<double>& values);

/// Value of the full game from the solved Riccati blocks:
///   1/2 [ <P11(0)x1, x1> + 2 eps <x1, P12(0)x2> + eps <P22(0)x2, x2> ]
///   + 1/2 integral ( tr(sigma1^T P11 sigma1) + tr(sigma2^T P22 sigma2) ) dt,
/// trapezoid on the solution grid.
double closed_form_value(const RiccatiSolution& full, const GameSpec& spec,
                         const Vector& x01, const Vector& x02);

/// Limit value from the reduced solution:
///   1/2 <P11bar(0)x1, x1> + 1/2 integral tr(sigma1^T P11bar sigma1) dt
///   + (T/2) tr(sigma2^T P22bar sigma2).
double limiting_value(const ReducedSolution& red, const GameSpec& spec,
                      const Vector& x01, const Vector& x02);

/// One saddle probe: sign-sensitive gap of a unilateral deviation, its
/// standard error, and the completion-of-squares identity residual on the
/// same paths.
struct SaddleRecord {
  int player = 0;      // which side deviated
  double rho = 0.0;    // Frobenius norm of the gain perturbation
  double gap = 0.0;    // J(deviation) - J(saddle), common random numbers
  double gap_stderr = 0.0;
  double identity_residual = 0.0;  // gap - (sign) completion-of-squares term
  double identity_stderr = 0.0;
  double cos_term = 0.0;           // the completion-of-squares quantity
  bool violation = false;          // inequality broken beyond 3 stderr
};

struct SaddleReport {
  std::vector<SaddleRecord> records;
  int n_violations = 0;
};

/// Probe the saddle inequalities with n_perturbations random constant gain
/// perturbations per player, Frobenius radius cycling through
/// {0.1, 0.5, 1.0}.  All batches share the seed (common random numbers);
/// the saddle-law batch is simulated once and reused.  h = 0 picks
/// min(eps/10, 1e-3).
SaddleReport saddle_check(const GameSpec& spec, double eps,
                          const RiccatiSolution& full, const Vector& x01,
                          const Vector& x02, int n_perturbations, long n_paths,
                          std::uint64_t seed, double h = 0.0);

/// Signed Monte Carlo gap J(exact law) - J(approximate law) on common random
/// numbers.  h = 0 picks eps/10.
double approx_gap(const GameSpec& spec, double eps,
                  const RiccatiSolution& full, const ReducedSolution& red,
                  const Vector& x01, const Vector& x02, long n_paths,
                  std::uint64_t seed, double h = 0.0);

/// Batch summary as JSON (mean, stderr, n_paths, h, seed).
Json simbatch_summary_json(const SimBatch& batch);

/// Optional per-path dump: "path, cost, terminal components".
void write_simbatch_csv(const SimBatch& batch, std::ostream& os);

}  // namespace sfg
