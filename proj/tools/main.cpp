#include <CLI11.hpp>

#include "sfg/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "Two-time-scale zero-sum LQ game toolkit: Riccati solvers, "
      "boundary-layer analysis, eps-sweeps, and Monte Carlo simulation"};
  app.require_subcommand(1);

  sfg::RunConfig config;
  double delta_val = 0.0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--spec", config.spec_path,
                    "path to the game description JSON")
        ->required();
    cmd->add_option("--eps", config.eps,
                    "singular perturbation parameter in (0, 1]");
    cmd->add_option("--eps-list", config.eps_list,
                    "comma-separated eps grid for the sweep")
        ->delimiter(',');
    cmd->add_option("--tol-rel", config.tol_rel,
                    "relative integration tolerance override");
    cmd->add_option("--tol-abs", config.tol_abs,
                    "absolute integration tolerance override");
    cmd->add_option("--delta", delta_val,
                    "boundary-layer split parameter in (0, gamma)");
    cmd->add_option("--paths", config.n_paths, "Monte Carlo path count");
    cmd->add_option("--step", config.h,
                    "simulation step size (must be <= eps/10)");
    cmd->add_option("--seed", config.seed, "64-bit seed for all randomness");
    cmd->add_option("--x0", config.x0,
                    "comma-separated initial state with n1+n2 entries")
        ->delimiter(',');
    cmd->add_option("--out", config.output_dir, "output directory");
    cmd->add_flag("--per-path-csv", config.per_path_csv,
                  "also write per-path cost/terminal CSV (simulate)");
    return cmd;
  };

  add_common(app.add_subcommand(
      "solve", "full + reduced + boundary-layer solutions and certificate"));
  add_common(app.add_subcommand(
      "sweep", "eps-sweep of the error estimates with fitted slopes"));
  add_common(app.add_subcommand(
      "simulate", "Monte Carlo objective and value comparison"));
  add_common(app.add_subcommand(
      "report", "solve + sweep + simulate plus a text summary"));

  CLI11_PARSE(app, argc, argv);

  CLI::App* cmd = app.get_subcommands().front();
  config.command = cmd->get_name();
  if (cmd->count("--delta") > 0) config.delta = delta_val;

  return sfg::run(config);
}
