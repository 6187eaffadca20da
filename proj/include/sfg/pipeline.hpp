#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sfg {

/// Batch-run configuration shared by the four pipeline commands.
struct RunConfig {
  std::string command;  // solve | sweep | simulate | report
  std::string spec_path;
  double eps = 0.1;
  std::vector<double> eps_list;  // sweep grid; empty -> default sweep
  double tol_rel = 0.0;          // 0 -> solver default
  double tol_abs = 0.0;          // 0 -> solver default
  std::optional<double> delta;   // layer split parameter override
  long n_paths = 10000;
  double h = 0.0;  // simulation step; 0 -> min(eps/10, 1e-3)
  std::uint64_t seed = 0;
  std::vector<double> x0;  // length n1+n2; empty -> all ones
  std::string output_dir = ".";
  bool per_path_csv = false;
};

/// Executes the configured command and writes its artifacts into
/// output_dir:
///   solve    -> trajectory.csv, reduced.csv, reduced_constants.json,
///               boundary.csv, certificate.json
///   sweep    -> sweep.csv, sweep_slopes.json
///   simulate -> value_report.json (+ paths.csv with per_path_csv)
///   report   -> all of the above plus report.txt
/// Returns 0 on success.  On any module error writes error.json (with an
/// "assumption" field when an assumption certificate failed) and returns 1.
int run(const RunConfig& config);

}  // namespace sfg
