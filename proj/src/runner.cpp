#include "qsf/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace qsf {

using nlohmann::json;
namespace fs = std::filesystem;

RunResult run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  RunResult result;
  result.out_dir = options.out_dir.empty() ? config.output_dir : options.out_dir;
  const std::vector<std::string>& checks =
      options.checks.empty() ? config.checks : options.checks;

  const Mesh mesh = build_mesh(config.geometry);
  const ScenarioSpec spec = build_scenario_spec(mesh, config);
  const Schedule schedule = Schedule::make(config.horizon, config.delta);

  result.trace = run(mesh, spec.initial_crack, spec.program, schedule, spec.lambda,
                     spec.max_components, spec.policy);
  const EvolutionTrace& trace = result.trace;

  fs::create_directories(result.out_dir);
  write_text_file(result.out_dir + "/config.json", emit_config(config));
  write_text_file(result.out_dir + "/mesh.json", mesh_to_json(mesh));
  write_text_file(result.out_dir + "/trace.csv", trace_to_csv(trace));
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "/snapshots/step_%04zu.json", i);
    write_text_file(result.out_dir + name,
                    crack_to_json(mesh, trace.steps[i].crack, trace.steps[i].index,
                                  trace.steps[i].time));
  }

  json summary;
  summary["out_dir"] = result.out_dir;
  summary["steps"] = trace.steps.size();
  summary["final_crack_edges"] = trace.steps.back().crack.size();
  summary["final_crack_length"] = trace.steps.back().crack.total_length;
  json check_rows = json::array();

  for (const std::string& name : checks) {
    CheckOutcome outcome;
    outcome.name = name;
    if (name == "balance") {
      std::vector<std::pair<double, double>> pairs;
      for (std::size_t i = 0; i + 1 < trace.steps.size(); ++i)
        pairs.emplace_back(trace.steps[i].time, trace.steps[i + 1].time);
      if (trace.steps.size() > 1)
        pairs.emplace_back(trace.steps.front().time, trace.steps.back().time);
      const BalanceReport report =
          energy_balance_check(mesh, trace, spec.program, pairs);
      outcome.pass = report.all_pass;
      outcome.worst = report.worst_slack;
      write_text_file(result.out_dir + "/reports/balance.csv", balance_to_csv(report));
    } else if (name == "minimality") {
      // Every admissible single-edge probe at every step; random supersets
      // stay opt-in through the library call.
      bool all = true;
      double worst = 0.0;
      std::string csv;
      for (std::size_t i = 1; i < trace.steps.size(); ++i) {
        const MinimalityReport report = minimality_check(
            mesh, trace, spec.program, static_cast<int>(i), 0, config.seed + i);
        all = all && report.all_pass;
        worst = std::min(worst, report.worst_margin);
        csv += minimality_to_csv(report);
      }
      outcome.pass = all;
      outcome.worst = worst;
      write_text_file(result.out_dir + "/reports/minimality.csv", csv);
    } else if (name == "griffith") {
      const GriffithReport report = griffith_check(mesh, trace, spec.program);
      // Not-applicable traces pass vacuously; the report records that.
      outcome.pass = !report.applicable || report.all_pass;
      outcome.worst = report.worst_residual;
      std::string csv = report.applicable ? griffith_to_csv(report)
                                          : "# NOT-APPLICABLE: growth is not a "
                                            "single-tip path\n";
      write_text_file(result.out_dir + "/reports/griffith.csv", csv);
    } else {
      throw ConfigError("checks", "unknown check '" + name + "'");
    }
    if (!outcome.pass) result.exit_code = kExitCheckFailed;
    check_rows.push_back({{"name", outcome.name},
                          {"pass", outcome.pass},
                          {"worst_slack", outcome.worst}});
    result.checks.push_back(std::move(outcome));
  }

  summary["checks"] = check_rows;
  int passes = 0;
  for (const auto& c : result.checks) passes += c.pass ? 1 : 0;
  summary["passes"] = passes;
  double worst = 0.0;
  for (const auto& c : result.checks) worst = std::min(worst, c.worst);
  summary["worst_slack"] = worst;
  summary["exit_code"] = result.exit_code;
  write_text_file(result.out_dir + "/summary.json", summary.dump(2));

  if (options.svg) {
    try {
      const double scale = spec.program.sup_norm(config.horizon, mesh.n_vertices());
      for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const DofMap dm = build_dofmap(mesh, trace.steps[i].crack);
        char name[64];
        std::snprintf(name, sizeof name, "/frames/frame_%04zu.svg", i);
        write_text_file(result.out_dir + name,
                        svg_frame(mesh, trace.steps[i].crack, &trace.steps[i].field,
                                  &dm, scale));
      }
    } catch (const std::exception& e) {
      if (!options.quiet)
        std::cerr << "svg emission skipped: " << e.what() << "\n";
    }
  }

  if (!options.quiet) {
    for (const auto& c : result.checks)
      std::cout << "check " << c.name << ": " << (c.pass ? "pass" : "FAIL")
                << " (worst slack " << format_double(c.worst) << ")\n";
  }
  return result;
}

CompareResult compare_runs(const std::string& dir_a, const std::string& dir_b) {
  const LoadedRun a = load_run(dir_a);
  const LoadedRun b = load_run(dir_b);
  if (a.mesh.hash != b.mesh.hash)
    throw std::runtime_error("runs use different meshes");
  if (a.times.size() != b.times.size() || a.times != b.times)
    throw std::runtime_error("runs use different schedules");

  CompareResult out;
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    CompareRow row;
    row.time = a.times[i];
    row.hausdorff = hausdorff_distance(a.mesh, a.cracks[i], b.cracks[i]);
    row.energy_delta = b.totals[i] - a.totals[i];
    if (row.hausdorff > 0.0 && out.first_divergence < 0.0)
      out.first_divergence = row.time;
    out.rows.push_back(row);
  }
  return out;
}

int sweep_lambda(const ScenarioConfig& base, const std::vector<double>& values,
                 const std::string& out_root) {
  int worst = kExitOk;
  std::ostringstream csv;
  csv << "lambda,out_dir,final_crack_edges,final_crack_length,exit_code\n";
  for (double lambda : values) {
    ScenarioConfig cfg = base;
    cfg.lambda = lambda;
    RunOptions opt;
    opt.quiet = true;
    opt.out_dir = out_root + "/lambda_" + format_double(lambda);
    const RunResult res = run_scenario(cfg, opt);
    worst = std::max(worst, res.exit_code);
    csv << format_double(lambda) << ',' << opt.out_dir << ','
        << res.trace.steps.back().crack.size() << ','
        << format_double(res.trace.steps.back().crack.total_length) << ','
        << res.exit_code << "\n";
  }
  write_text_file(out_root + "/sweep.csv", csv.str());
  return worst;
}

}  // namespace qsf
