#pragma once

#include <string>
#include <vector>

#include "qsf/config.hpp"
#include "qsf/serialize.hpp"

namespace qsf {

// Exit codes shared by the library entry points and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitSolverError = 3;

struct RunOptions {
  std::string out_dir;                // overrides config.output_dir when nonempty
  std::vector<std::string> checks;    // overrides config.checks when nonempty
  bool svg = false;
  bool quiet = false;
};

struct CheckOutcome {
  std::string name;
  bool pass = true;
  double worst = 0.0;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string out_dir;
  std::vector<CheckOutcome> checks;
  EvolutionTrace trace;
};

/// Runs the scenario, writes trace CSV, crack snapshots, reports, and a JSON
/// summary under the output directory; exit code 0 iff all enabled checks
/// pass. SVG frames are best effort and never affect the exit code.
RunResult run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

struct CompareRow {
  double time = 0.0;
  double hausdorff = 0.0;
  double energy_delta = 0.0;
};

struct CompareResult {
  std::vector<CompareRow> rows;
  double first_divergence = -1.0;  // earliest time with a nonzero crack distance
};

/// Per-time crack distance and energy deltas of two completed runs on the
/// same mesh.
CompareResult compare_runs(const std::string& dir_a, const std::string& dir_b);

/// Runs the base scenario once per lambda value, one subdirectory each, and
/// writes a sweep summary CSV. Returns the worst exit code encountered.
int sweep_lambda(const ScenarioConfig& base, const std::vector<double>& values,
                 const std::string& out_root);

}  // namespace qsf
