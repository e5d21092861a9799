#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qsf/runner.hpp"

namespace {

std::vector<std::string> split_checks(const std::string& csv) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : csv) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-static antiplane fracture evolution by penalized "
               "incremental energy minimization"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checks_csv;
  bool svg = false;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario config");
  run_cmd->add_option("config", config_path, "Scenario JSON file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_option("--checks", checks_csv,
                      "Comma-separated checks: balance,minimality,griffith");
  run_cmd->add_flag("--svg", svg, "Emit per-step SVG frames");

  std::string dir_a, dir_b;
  auto* compare_cmd = app.add_subcommand("compare", "Compare two completed runs");
  compare_cmd->add_option("dirA", dir_a, "First run directory")->required();
  compare_cmd->add_option("dirB", dir_b, "Second run directory")->required();

  std::string sweep_config, sweep_param, sweep_out;
  std::vector<double> sweep_values;
  auto* sweep_cmd = app.add_subcommand("sweep", "Grid driver over a parameter");
  sweep_cmd->add_option("config", sweep_config, "Scenario JSON file")->required();
  sweep_cmd->add_option("--param", sweep_param, "Parameter name (lambda)")->required();
  sweep_cmd->add_option("--values", sweep_values, "Parameter values")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--out", sweep_out, "Sweep output root");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const qsf::ScenarioConfig config = qsf::parse_config(config_path);
      qsf::RunOptions options;
      options.out_dir = out_dir;
      options.checks = split_checks(checks_csv);
      options.svg = svg;
      return qsf::run_scenario(config, options).exit_code;
    }
    if (*compare_cmd) {
      const qsf::CompareResult result = qsf::compare_runs(dir_a, dir_b);
      std::cout << "time,hausdorff,energy_delta\n";
      for (const auto& row : result.rows)
        std::cout << qsf::format_double(row.time) << ','
                  << qsf::format_double(row.hausdorff) << ','
                  << qsf::format_double(row.energy_delta) << "\n";
      std::cout << "first_divergence,"
                << qsf::format_double(result.first_divergence) << "\n";
      return qsf::kExitOk;
    }
    if (*sweep_cmd) {
      if (sweep_param != "lambda") {
        std::cerr << "config error: unsupported sweep parameter '" << sweep_param
                  << "'\n";
        return qsf::kExitConfigError;
      }
      const qsf::ScenarioConfig config = qsf::parse_config(sweep_config);
      const std::string root = sweep_out.empty() ? config.output_dir : sweep_out;
      return qsf::sweep_lambda(config, sweep_values, root);
    }
  } catch (const qsf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return qsf::kExitConfigError;
  } catch (const qsf::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return qsf::kExitSolverError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qsf::kExitConfigError;
  }
  return qsf::kExitOk;
}
