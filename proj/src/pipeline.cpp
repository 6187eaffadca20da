#include "sfg/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>

#include "sfg/asymptotics.hpp"
#include "sfg/boundary.hpp"
#include "sfg/errors.hpp"
#include "sfg/game.hpp"
#include "sfg/game_spec.hpp"
#include "sfg/io.hpp"
#include "sfg/reduced.hpp"
#include "sfg/riccati.hpp"

namespace sfg {

namespace {

namespace fs = std::filesystem;

OdeTolerance make_tol(const RunConfig& config) {
  OdeTolerance tol;
  if (config.tol_rel > 0.0) tol.rel = config.tol_rel;
  if (config.tol_abs > 0.0) tol.abs = config.tol_abs;
  return tol;
}

GameSpec load_spec(const RunConfig& config) {
  if (config.spec_path.empty())
    throw SpecError("no spec file given (--spec <path>)");
  return game_spec_from_json(Json::parse(read_file(config.spec_path)));
}

std::pair<Vector, Vector> split_x0(const RunConfig& config,
                                   const GameSpec& spec) {
  if (config.x0.empty())
    return {Vector::Ones(spec.n1), Vector::Ones(spec.n2)};
  if (static_cast<int>(config.x0.size()) != spec.n1 + spec.n2)
    throw SpecError("x0 must have n1 + n2 = " +
                    std::to_string(spec.n1 + spec.n2) + " entries, got " +
                    std::to_string(config.x0.size()));
  Vector x01(spec.n1), x02(spec.n2);
  for (int i = 0; i < spec.n1; ++i) x01[i] = config.x0[i];
  for (int i = 0; i < spec.n2; ++i)
    x02[i] = config.x0[static_cast<std::size_t>(spec.n1 + i)];
  return {x01, x02};
}

void write_text(const std::string& dir, const std::string& name,
                const std::string& content) {
  write_file((fs::path(dir) / name).string(), content);
}

void write_json(const std::string& dir, const std::string& name,
                const Json& j) {
  write_text(dir, name, j.dump(2) + "\n");
}

template <typename F>
std::string render_csv(F&& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

struct SolveArtifacts {
  RiccatiSolution full;
  ReducedSolution red;
  BoundaryLayerSolution bl;
  double delta = 0.0;
  double q2 = 0.0;
  double sigma_min_delta2 = 0.0;
  double are_residual = 0.0;
  double s_abscissa = 0.0;
};

SolveArtifacts compute_solve(const GameSpec& spec, double eps,
                             const OdeTolerance& tol,
                             std::optional<double> requested_delta) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw SpecError("eps must lie in (0, 1]");
  SolveArtifacts a;
  a.red = solve_reduced(spec, tol);
  a.full = solve_full(spec, eps, tol);
  a.delta = select_delta(spec, a.red.p22bar, requested_delta);
  a.bl = solve_boundary_layer(
      spec, a.red, a.delta,
      default_tau_max(eps, spec.T, a.red.gamma, a.delta), tol);
  const DeltaBlocks d = delta_blocks(spec);
  a.sigma_min_delta2 = smallest_singular_value(d.delta2);
  a.are_residual = frobenius(spec.A22.transpose() * a.red.p22bar +
                             a.red.p22bar * spec.A22 +
                             a.red.p22bar * d.delta2 * a.red.p22bar + spec.Q2);
  a.s_abscissa = spectral_abscissa(a.red.s);
  a.q2 = attraction_check(spec, a.red.p22bar, a.delta).q2;
  return a;
}

Json certificate_json(const SolveArtifacts& a, const GameSpec& spec,
                      double eps) {
  Json cert;
  cert["eps"] = eps;
  cert["T"] = spec.T;
  Json as;
  {
    Json j;
    j["status"] = "pass";
    j["smallest_singular_value_delta2"] = a.sigma_min_delta2;
    as["3.1"] = j;
  }
  {
    Json j;
    j["status"] = "pass";
    j["slow_flow_reached_t0"] = true;
    j["sup_P11bar"] = a.red.p0;
    as["3.2a"] = j;
  }
  {
    Json j;
    j["status"] = "pass";
    j["are_residual"] = a.are_residual;
    j["spectral_abscissa_S"] = a.s_abscissa;
    as["3.2b"] = j;
  }
  {
    Json j;
    j["status"] = "pass";
    j["gamma"] = a.red.gamma;
    as["4.1"] = j;
  }
  {
    Json j;
    j["status"] = "pass";
    j["delta"] = a.delta;
    j["q2"] = a.q2;
    j["p22bar_norm"] = frobenius(a.red.p22bar);
    as["4.2"] = j;
  }
  cert["assumptions"] = as;
  cert["all_pass"] = true;
  return cert;
}

void write_solve_artifacts(const SolveArtifacts& a, const GameSpec& spec,
                           double eps, const std::string& dir) {
  write_text(dir, "trajectory.csv", render_csv([&](std::ostream& os) {
               write_trajectory_csv(a.full, os);
             }));
  write_text(dir, "reduced.csv", render_csv([&](std::ostream& os) {
               write_reduced_csv(a.red, os);
             }));
  write_json(dir, "reduced_constants.json", reduced_constants_json(a.red));
  write_text(dir, "boundary.csv", render_csv([&](std::ostream& os) {
               write_boundary_csv(a.bl, os);
             }));
  write_json(dir, "certificate.json", certificate_json(a, spec, eps));
}

SweepResult compute_sweep(const GameSpec& spec, const RunConfig& config,
                          const OdeTolerance& tol, const Vector& x01,
                          const Vector& x02) {
  SweepOptions so;
  so.eps_list = config.eps_list;
  so.tol = tol;
  so.delta = config.delta;
  so.x01 = x01;
  so.x02 = x02;
  std::vector<double> grid =
      so.eps_list.empty() ? kDefaultSweepEps : so.eps_list;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.size() < 3)
    throw InsufficientPointsError(
        "sweep needs at least 3 distinct eps values for slope fitting, got " +
        std::to_string(grid.size()));
  return run_sweep(spec, so);
}

void write_sweep_artifacts(const SweepResult& sweep, const std::string& dir) {
  write_text(dir, "sweep.csv", render_csv([&](std::ostream& os) {
               write_sweep_csv(sweep, os);
             }));
  write_json(dir, "sweep_slopes.json", sweep_slopes_json(sweep));
}

Json compute_value_report(const GameSpec& spec, const RunConfig& config,
                          const OdeTolerance& tol, const Vector& x01,
                          const Vector& x02, const std::string& dir) {
  const double eps = config.eps;
  const RiccatiSolution full = solve_full(spec, eps, tol);
  const ReducedSolution red = solve_reduced(spec, tol);
  const double v_eps = closed_form_value(full, spec, x01, x02);
  const double v_bar = limiting_value(red, spec, x01, x02);

  const double h = config.h > 0.0 ? config.h : std::min(eps / 10.0, 1e-3);
  const FeedbackLaw exact = make_feedback(FeedbackLaw::Kind::exact, full, spec);
  SimOptions opts;
  opts.store_terminals = config.per_path_csv;
  const SimBatch batch = simulate_game(spec, eps, exact, x01, x02, h,
                                       config.n_paths, config.seed, opts);
  const auto [j_mc, j_se] = mc_objective(batch);
  const double gap = approx_gap(spec, eps, full, red, x01, x02,
                                config.n_paths, config.seed, h);

  Json report;
  report["V_eps_closed"] = v_eps;
  report["J_mc"] = j_mc;
  report["J_mc_stderr"] = j_se;
  report["V_bar"] = v_bar;
  report["gap_exact_approx"] = gap;
  report["gap_to_limit"] = v_eps - v_bar;
  report["eps"] = eps;
  report["h"] = batch.h;
  report["n_paths"] = batch.n_paths;
  report["seed"] = batch.seed;

  if (config.per_path_csv)
    write_text(dir, "paths.csv", render_csv([&](std::ostream& os) {
                 write_simbatch_csv(batch, os);
               }));
  return report;
}

std::string matrix_str(const Matrix& m) { return matrix_to_json(m).dump(); }

std::string render_report_text(const GameSpec& spec, const RunConfig& config,
                               const SolveArtifacts& a, const Json& slopes,
                               const Json& value) {
  std::ostringstream os;
  os << "problem\n";
  os << "  n1=" << spec.n1 << " n2=" << spec.n2 << " k1=" << spec.k1
     << " k2=" << spec.k2 << " m1=" << spec.m1 << " m2=" << spec.m2
     << " T=" << format_double(spec.T) << "\n";
  os << "  eps = " << format_double(config.eps) << "\n\n";

  os << "assumption certificate\n";
  os << "  3.1  pass  smallest singular value of Delta2 = "
     << format_double(a.sigma_min_delta2) << "\n";
  os << "  3.2a pass  slow flow reached t = 0, sup |P11bar|_F = "
     << format_double(a.red.p0) << "\n";
  os << "  3.2b pass  ARE residual = " << format_double(a.are_residual)
     << ", spectral abscissa of S = " << format_double(a.s_abscissa) << "\n";
  os << "  4.1  pass  gamma = " << format_double(a.red.gamma) << "\n";
  os << "  4.2  pass  delta = " << format_double(a.delta)
     << ", q2 = " << format_double(a.q2)
     << ", |P22bar|_F = " << format_double(frobenius(a.red.p22bar)) << "\n\n";

  os << "reduced constants\n";
  os << "  P22bar = " << matrix_str(a.red.p22bar) << "\n";
  os << "  S      = " << matrix_str(a.red.s) << "\n";
  os << "  P11bar(0) = " << matrix_str(a.red.p11bar.at(0.0)) << "\n\n";

  os << "layer decay\n";
  os << "  tau_max = " << format_double(a.bl.tau_grid.back())
     << ", k1 = " << format_double(a.bl.k1)
     << ", k2 = " << format_double(a.bl.k2) << "\n\n";

  os << "sweep slopes (log-log fit over eps)\n";
  for (const auto& [name, fit] : slopes.at("slopes").items()) {
    os << "  " << name << ": ";
    if (fit.contains("slope"))
      os << "slope = " << format_double(fit.at("slope").get<double>())
         << ", r^2 = " << format_double(fit.at("r_squared").get<double>());
    else
      os << fit.at("error").get<std::string>();
    os << "\n";
  }
  os << "\n";

  os << "value report (eps = " << format_double(config.eps) << ")\n";
  os << "  V_eps_closed     = "
     << format_double(value.at("V_eps_closed").get<double>()) << "\n";
  os << "  J_mc             = " << format_double(value.at("J_mc").get<double>())
     << " +/- " << format_double(value.at("J_mc_stderr").get<double>())
     << "\n";
  os << "  V_bar            = "
     << format_double(value.at("V_bar").get<double>()) << "\n";
  os << "  gap_exact_approx = "
     << format_double(value.at("gap_exact_approx").get<double>()) << "\n";
  os << "  gap_to_limit     = "
     << format_double(value.at("gap_to_limit").get<double>()) << "\n";
  return os.str();
}

int dispatch(const RunConfig& config) {
  const GameSpec spec = load_spec(config);
  const OdeTolerance tol = make_tol(config);
  const auto [x01, x02] = split_x0(config, spec);
  const std::string& dir = config.output_dir;

  if (config.command == "solve") {
    const SolveArtifacts a =
        compute_solve(spec, config.eps, tol, config.delta);
    write_solve_artifacts(a, spec, config.eps, dir);
    return 0;
  }
  if (config.command == "sweep") {
    const SweepResult sweep = compute_sweep(spec, config, tol, x01, x02);
    write_sweep_artifacts(sweep, dir);
    return 0;
  }
  if (config.command == "simulate") {
    const Json report =
        compute_value_report(spec, config, tol, x01, x02, dir);
    write_json(dir, "value_report.json", report);
    return 0;
  }
  if (config.command == "report") {
    const SolveArtifacts a =
        compute_solve(spec, config.eps, tol, config.delta);
    write_solve_artifacts(a, spec, config.eps, dir);
    const SweepResult sweep = compute_sweep(spec, config, tol, x01, x02);
    write_sweep_artifacts(sweep, dir);
    const Json slopes = sweep_slopes_json(sweep);
    const Json value =
        compute_value_report(spec, config, tol, x01, x02, dir);
    write_json(dir, "value_report.json", value);
    write_text(dir, "report.txt",
               render_report_text(spec, config, a, slopes, value));
    return 0;
  }
  throw SpecError("unknown command '" + config.command +
                  "' (expected solve | sweep | simulate | report)");
}

void emit_error(const RunConfig& config, const Json& j) {
  const std::string text = j.dump(2) + "\n";
  std::fputs(text.c_str(), stderr);
  try {
    write_text(config.output_dir, "error.json", text);
  } catch (...) {
    // The error report itself is best-effort; the exit status carries the
    // failure either way.
  }
}

}  // namespace

int run(const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  try {
    return dispatch(config);
  } catch (const AssumptionError& e) {
    Json j;
    j["error"] = e.what();
    j["assumption"] = e.id;
    emit_error(config, j);
  } catch (const BlowUpError& e) {
    Json j;
    j["error"] = e.what();
    j["t_escape"] = e.t_escape;
    emit_error(config, j);
  } catch (const std::exception& e) {
    Json j;
    j["error"] = e.what();
    emit_error(config, j);
  }
  return 1;
}

}  // namespace sfg
