#include "sfg/game.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "sfg/errors.hpp"
#include "sfg/io.hpp"
#include "sfg/rng.hpp"

namespace sfg {

GainSet FeedbackLaw::at(double t) const {
  return eval_(std::clamp(t, 0.0, T));
}

namespace {

void check_law_dims(const FeedbackLaw& law, const GameSpec& spec) {
  if (law.n1 != spec.n1 || law.n2 != spec.n2 || law.k1 != spec.k1 ||
      law.k2 != spec.k2)
    throw SpecError("feedback law dimensions do not match the spec");
  if (std::abs(law.T - spec.T) > 1e-9 * std::max(1.0, std::abs(spec.T)))
    throw GridMismatchError("feedback law horizon " + format_double(law.T) +
                            " does not match spec horizon " +
                            format_double(spec.T));
}

}  // namespace

FeedbackLaw make_feedback(FeedbackLaw::Kind kind, const RiccatiSolution& full,
                          const GameSpec& spec) {
  if (kind != FeedbackLaw::Kind::exact)
    throw KindMismatchError(
        "a full-system solution builds only the exact feedback law");
  if (full.n1 != spec.n1 || full.n2 != spec.n2 ||
      std::abs(full.T - spec.T) > 1e-9 * std::max(1.0, std::abs(spec.T)))
    throw SpecError("full solution does not match the spec");

  FeedbackLaw law;
  law.kind = kind;
  law.n1 = spec.n1;
  law.n2 = spec.n2;
  law.k1 = spec.k1;
  law.k2 = spec.k2;
  law.T = spec.T;
  const auto sol = std::make_shared<RiccatiSolution>(full);
  const Matrix b11t = spec.B11.transpose(), b12t = spec.B12.transpose();
  const Matrix b21t = spec.B21.transpose(), b22t = spec.B22.transpose();
  const double eps = full.eps;
  law.eval_ = [sol, b11t, b12t, b21t, b22t, eps](double t) {
    const auto b = sol->at(t);
    GainSet g;
    g.F11 = b11t * b.P11 + b21t * b.P12.transpose();
    g.F12 = eps * (b11t * b.P12) + b21t * b.P22;
    g.F21 = -(b12t * b.P11 + b22t * b.P12.transpose());
    g.F22 = -(eps * (b12t * b.P12) + b22t * b.P22);
    return g;
  };
  return law;
}

FeedbackLaw make_feedback(FeedbackLaw::Kind kind, const ReducedSolution& red,
                          const GameSpec& spec) {
  if (kind != FeedbackLaw::Kind::approximate)
    throw KindMismatchError(
        "a reduced solution builds only the approximate feedback law");
  if (red.spec.n1 != spec.n1 || red.spec.n2 != spec.n2 ||
      std::abs(red.spec.T - spec.T) > 1e-9 * std::max(1.0, std::abs(spec.T)))
    throw SpecError("reduced solution does not match the spec");

  FeedbackLaw law;
  law.kind = kind;
  law.n1 = spec.n1;
  law.n2 = spec.n2;
  law.k1 = spec.k1;
  law.k2 = spec.k2;
  law.T = spec.T;
  const auto sol = std::make_shared<ReducedSolution>(red);
  const Matrix b11t = spec.B11.transpose(), b12t = spec.B12.transpose();
  const Matrix b21t = spec.B21.transpose(), b22t = spec.B22.transpose();
  const Matrix f12 = b21t * red.p22bar;
  const Matrix f22 = -b22t * red.p22bar;
  law.eval_ = [sol, b11t, b12t, f12, f22](double t) {
    const Matrix p11 = sol->p11_at(t);
    const Matrix p12t = sol->p12_at(t).transpose();
    GainSet g;
    g.F11 = b11t * p11 + sol->spec.B21.transpose() * p12t;
    g.F12 = f12;
    g.F21 = -(b12t * p11 + sol->spec.B22.transpose() * p12t);
    g.F22 = f22;
    return g;
  };
  return law;
}

FeedbackLaw perturb_feedback(const FeedbackLaw& base, int player,
                             const Matrix& row_delta) {
  if (player != 1 && player != 2)
    throw SpecError("perturb_feedback: player must be 1 or 2");
  const int rows = player == 1 ? base.k1 : base.k2;
  if (row_delta.rows() != rows || row_delta.cols() != base.n1 + base.n2)
    throw SpecError("perturb_feedback: perturbation must be k_i x (n1 + n2)");
  FeedbackLaw law = base;
  const Matrix d1 = row_delta.leftCols(base.n1);
  const Matrix d2 = row_delta.rightCols(base.n2);
  law.eval_ = [inner = base.eval_, player, d1, d2](double t) {
    GainSet g = inner(t);
    if (player == 1) {
      g.F11 += d1;
      g.F12 += d2;
    } else {
      g.F21 += d1;
      g.F22 += d2;
    }
    return g;
  };
  return law;
}

SimBatch simulate_game(const GameSpec& spec, double eps,
                       const FeedbackLaw& law, const Vector& x01,
                       const Vector& x02, double h, long n_paths,
                       std::uint64_t seed, const SimOptions& options) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw SpecError("simulate_game: eps must lie in (0, 1]");
  if (!(h > 0.0)) throw SpecError("simulate_game: h must be positive");
  if (h > eps / 10.0 * (1.0 + 1e-12))
    throw StepTooLargeError(
        "simulate_game: h = " + format_double(h) +
        " exceeds the fast-resolution limit eps/10 = " + format_double(eps / 10.0));
  if (n_paths < 1) throw SpecError("simulate_game: n_paths must be >= 1");
  if (x01.size() != spec.n1 || x02.size() != spec.n2)
    throw SpecError("simulate_game: initial state has wrong dimensions");
  check_law_dims(law, spec);
  if (options.aux_reference) check_law_dims(*options.aux_reference, spec);

  const int n1 = spec.n1, n2 = spec.n2, n = n1 + n2;
  const int m = spec.m1 + spec.m2;
  const double T = spec.T;
  const long K = static_cast<long>(std::ceil(T / h - 1e-9));
  const double hh = T / static_cast<double>(K);

  const CompactSystem cs = assemble_compact(spec, eps);
  const Matrix noise_map = cs.sigma * std::sqrt(hh);
  const Matrix eye = Matrix::Identity(n, n);

  // Per-step closed-loop data, shared by every path.
  std::vector<Matrix> step_mat(static_cast<std::size_t>(K));
  std::vector<Matrix> cost_q(static_cast<std::size_t>(K) + 1);
  std::vector<Matrix> aux_q;
  if (options.aux_reference) aux_q.resize(static_cast<std::size_t>(K) + 1);

  Matrix stacked(spec.k1 + spec.k2, n);
  for (long k = 0; k <= K; ++k) {
    const double t = (k == K) ? T : hh * static_cast<double>(k);
    const GainSet g = law.at(t);
    Matrix g1(spec.k1, n), g2(spec.k2, n);
    g1 << g.F11, g.F12;
    g2 << g.F21, g.F22;
    cost_q[static_cast<std::size_t>(k)] =
        0.5 * (cs.Q - g1.transpose() * g1 + g2.transpose() * g2);
    if (k < K) {
      stacked.topRows(spec.k1) = g1;
      stacked.bottomRows(spec.k2) = g2;
      step_mat[static_cast<std::size_t>(k)] =
          eye + hh * (cs.A + cs.B * stacked);
    }
    if (options.aux_reference) {
      const GainSet gr = options.aux_reference->at(t);
      Matrix diff;
      if (options.aux_player == 1) {
        diff.resize(spec.k1, n);
        diff << g.F11 - gr.F11, g.F12 - gr.F12;
      } else {
        diff.resize(spec.k2, n);
        diff << g.F21 - gr.F21, g.F22 - gr.F22;
      }
      aux_q[static_cast<std::size_t>(k)] = 0.5 * diff.transpose() * diff;
    }
  }

  SimBatch batch;
  batch.eps = eps;
  batch.h = hh;
  batch.n_steps = K;
  batch.n_paths = n_paths;
  batch.seed = seed;
  batch.x0_1 = x01;
  batch.x0_2 = x02;
  batch.costs.reserve(static_cast<std::size_t>(n_paths));
  if (options.store_terminals)
    batch.terminals.reserve(static_cast<std::size_t>(n_paths));
  if (options.aux_reference)
    batch.aux_costs.reserve(static_cast<std::size_t>(n_paths));

  std::vector<double> moment_acc;
  if (options.track_moment_sup)
    moment_acc.assign(static_cast<std::size_t>(K) + 1, 0.0);

  const NoiseStream noise(seed, /*domain=*/0);
  Vector x(n), tmp(n), qx(n), xi(m);
  Vector x_init(n);
  x_init.head(n1) = x01;
  x_init.tail(n2) = x02;

  constexpr double kBlowUpSq = 1e18;  // |X| > 1e9
  for (long p = 0; p < n_paths; ++p) {
    x = x_init;
    qx.noalias() = cost_q[0] * x;
    double c_prev = x.dot(qx);
    double total = 0.0;
    double aux_prev = 0.0, aux_total = 0.0;
    if (options.aux_reference) {
      qx.noalias() = aux_q[0] * x;
      aux_prev = x.dot(qx);
    }
    if (options.track_moment_sup) moment_acc[0] += x.squaredNorm();

    for (long k = 0; k < K; ++k) {
      noise.fill_normals(static_cast<std::uint32_t>(p),
                         static_cast<std::uint32_t>(k), xi.data(), m);
      tmp.noalias() = step_mat[static_cast<std::size_t>(k)] * x;
      tmp.noalias() += noise_map * xi;
      x.swap(tmp);
      const double nsq = x.squaredNorm();
      if (!(nsq < kBlowUpSq)) {
        const double t_now = hh * static_cast<double>(k + 1);
        throw PathBlowUpError(p, t_now,
                              "simulated path " + std::to_string(p) +
                                  " left the admissible region at t = " +
                                  format_double(t_now));
      }
      qx.noalias() = cost_q[static_cast<std::size_t>(k + 1)] * x;
      const double c_next = x.dot(qx);
      total += 0.5 * hh * (c_prev + c_next);
      c_prev = c_next;
      if (options.aux_reference) {
        qx.noalias() = aux_q[static_cast<std::size_t>(k + 1)] * x;
        const double a_next = x.dot(qx);
        aux_total += 0.5 * hh * (aux_prev + a_next);
        aux_prev = a_next;
      }
      if (options.track_moment_sup) moment_acc[static_cast<std::size_t>(k + 1)] += nsq;
    }

    batch.costs.push_back(total);
    if (options.store_terminals) batch.terminals.push_back(x);
    if (options.aux_reference) batch.aux_costs.push_back(aux_total);
  }

  if (options.track_moment_sup) {
    double sup = 0.0;
    for (double acc : moment_acc)
      sup = std::max(sup, acc / static_cast<double>(n_paths));
    batch.moment_sup = sup;
  }
  return batch;
}

std::pair<double, double> mean_stderr(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n == 0) throw SpecError("mean_stderr: empty sample");
  const double mean =
      pairwise_sum(std::span<const double>(values)) / static_cast<double>(n);
  if (n == 1) return {mean, 0.0};
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = values[i] - mean;
    sq[i] = d * d;
  }
  const double var = pairwise_sum(std::span<const double>(sq)) /
                     static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

std::pair<double, double> mc_objective(const SimBatch& batch) {
  return mean_stderr(batch.costs);
}

namespace {

double noise_trace(const Matrix& p, const Matrix& sigma) {
  return (sigma.transpose() * p * sigma).trace();
}

}  // namespace

double closed_form_value(const RiccatiSolution& full, const GameSpec& spec,
                         const Vector& x01, const Vector& x02) {
  if (x01.size() != spec.n1 || x02.size() != spec.n2)
    throw SpecError("closed_form_value: initial state has wrong dimensions");
  const auto b0 = full.at(0.0);
  const double quad = x01.dot(b0.P11 * x01) +
                      2.0 * full.eps * x01.dot(b0.P12 * x02) +
                      full.eps * x02.dot(b0.P22 * x02);
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < full.grid.size(); ++i) {
    const double f0 = noise_trace(full.P11[i], spec.sigma1) +
                      noise_trace(full.P22[i], spec.sigma2);
    const double f1 = noise_trace(full.P11[i + 1], spec.sigma1) +
                      noise_trace(full.P22[i + 1], spec.sigma2);
    integral += 0.5 * (full.grid[i + 1] - full.grid[i]) * (f0 + f1);
  }
  return 0.5 * quad + 0.5 * integral;
}

double limiting_value(const ReducedSolution& red, const GameSpec& spec,
                      const Vector& x01, const Vector& x02) {
  if (x01.size() != spec.n1 || x02.size() != spec.n2)
    throw SpecError("limiting_value: initial state has wrong dimensions");
  const Matrix p110 = red.p11bar.at(0.0);
  double integral = 0.0;
  const auto& g = red.p11bar.grid;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double f0 = noise_trace(red.p11bar.at(g[i]), spec.sigma1);
    const double f1 = noise_trace(red.p11bar.at(g[i + 1]), spec.sigma1);
    integral += 0.5 * (g[i + 1] - g[i]) * (f0 + f1);
  }
  return 0.5 * x01.dot(p110 * x01) + 0.5 * integral +
         0.5 * spec.T * noise_trace(red.p22bar, spec.sigma2);
}

SaddleReport saddle_check(const GameSpec& spec, double eps,
                          const RiccatiSolution& full, const Vector& x01,
                          const Vector& x02, int n_perturbations, long n_paths,
                          std::uint64_t seed, double h) {
  const double h_use = h > 0.0 ? h : std::min(eps / 10.0, 1e-3);
  const FeedbackLaw exact =
      make_feedback(FeedbackLaw::Kind::exact, full, spec);

  SimOptions base_opts;
  base_opts.store_terminals = false;
  const SimBatch saddle_batch = simulate_game(spec, eps, exact, x01, x02,
                                              h_use, n_paths, seed, base_opts);

  constexpr double kRhoCycle[3] = {0.1, 0.5, 1.0};
  SaddleReport report;
  const std::size_t np = static_cast<std::size_t>(n_paths);
  std::vector<double> diff(np), resid(np);

  for (int player = 1; player <= 2; ++player) {
    const int rows = player == 1 ? spec.k1 : spec.k2;
    for (int i = 0; i < n_perturbations; ++i) {
      const double rho = kRhoCycle[i % 3];
      DrawStream draw(seed, static_cast<std::uint32_t>((player << 16) | i));
      Matrix d(rows, spec.n1 + spec.n2);
      for (Eigen::Index r = 0; r < d.rows(); ++r)
        for (Eigen::Index c = 0; c < d.cols(); ++c) d(r, c) = draw.normal();
      const double norm = d.norm();
      if (norm < 1e-300)
        d(0, 0) = rho;
      else
        d *= rho / norm;

      const FeedbackLaw perturbed = perturb_feedback(exact, player, d);
      SimOptions opts;
      opts.store_terminals = false;
      opts.aux_reference = &exact;
      opts.aux_player = player;
      const SimBatch pb = simulate_game(spec, eps, perturbed, x01, x02, h_use,
                                        n_paths, seed, opts);

      for (std::size_t p = 0; p < np; ++p) {
        diff[p] = pb.costs[p] - saddle_batch.costs[p];
        // Unilateral deviations split off an exact quadratic penalty:
        // positive for the minimiser, negative for the maximiser.
        resid[p] = player == 2 ? diff[p] - pb.aux_costs[p]
                               : diff[p] + pb.aux_costs[p];
      }
      const auto [gap, gap_se] = mean_stderr(diff);
      const auto [id_mean, id_se] = mean_stderr(resid);

      SaddleRecord rec;
      rec.player = player;
      rec.rho = rho;
      rec.gap = gap;
      rec.gap_stderr = gap_se;
      rec.identity_residual = id_mean;
      rec.identity_stderr = id_se;
      rec.cos_term = mean_stderr(pb.aux_costs).first;
      rec.violation =
          player == 1 ? gap > 3.0 * gap_se : gap < -3.0 * gap_se;
      if (rec.violation) ++report.n_violations;
      report.records.push_back(rec);
    }
  }
  return report;
}

double approx_gap(const GameSpec& spec, double eps,
                  const RiccatiSolution& full, const ReducedSolution& red,
                  const Vector& x01, const Vector& x02, long n_paths,
                  std::uint64_t seed, double h) {
  const double h_use = h > 0.0 ? h : eps / 10.0;
  const FeedbackLaw exact = make_feedback(FeedbackLaw::Kind::exact, full, spec);
  const FeedbackLaw approx =
      make_feedback(FeedbackLaw::Kind::approximate, red, spec);
  SimOptions opts;
  opts.store_terminals = false;
  const SimBatch be =
      simulate_game(spec, eps, exact, x01, x02, h_use, n_paths, seed, opts);
  const SimBatch ba =
      simulate_game(spec, eps, approx, x01, x02, h_use, n_paths, seed, opts);
  std::vector<double> diff(be.costs.size());
  for (std::size_t p = 0; p < diff.size(); ++p)
    diff[p] = be.costs[p] - ba.costs[p];
  return mean_stderr(diff).first;
}

Json simbatch_summary_json(const SimBatch& batch) {
  const auto [mean, se] = mc_objective(batch);
  Json j;
  j["mean"] = mean;
  j["stderr"] = se;
  j["n_paths"] = batch.n_paths;
  j["h"] = batch.h;
  j["seed"] = batch.seed;
  return j;
}

void write_simbatch_csv(const SimBatch& batch, std::ostream& os) {
  std::vector<std::string> names{"path", "cost"};
  const int n = static_cast<int>(batch.x0_1.size() + batch.x0_2.size());
  for (int i = 0; i < n; ++i) names.push_back("terminal_" + std::to_string(i));
  write_csv_header(os, names);
  std::vector<double> row;
  for (std::size_t p = 0; p < batch.costs.size(); ++p) {
    row.clear();
    row.push_back(static_cast<double>(p));
    row.push_back(batch.costs[p]);
    if (p < batch.terminals.size())
      for (Eigen::Index i = 0; i < batch.terminals[p].size(); ++i)
        row.push_back(batch.terminals[p][i]);
    write_csv_row(os, row);
  }
}

}  // namespace sfg
