#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace safedrive::cli;

  CLI::App app{"Deterministic driving-safety stack: scenario runner, sweeps and reports"};
  app.require_subcommand(1);

  CommonOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "Run scenarios and write traces + summary CSV");
  run->add_option("--scenario", run_opt.scenario_paths, "Scenario file (repeatable)")
      ->required();
  run->add_option("--seed", run_opt.seeds, "Episode seed (repeatable; default: scenario's)");
  run->add_option("--config", run_opt.config_path, "JSON run configuration file");
  run->add_option("--set", run_opt.overrides, "Override config key, e.g. safety.v_max=5");
  run->add_option("--variant", run_opt.variant, "Controller variant: full | no_safety")
      ->check(CLI::IsMember({"full", "no_safety"}));
  run->add_option("--out", run_opt.out_dir, "Output directory");
  run->add_option("--jobs", run_opt.jobs, "Parallel episodes (default: hardware)");

  SweepOptions sweep_opt;
  CLI::App* sweep = app.add_subcommand("sweep", "Run the suite per safety factor and aggregate");
  sweep->add_option("--scenario", sweep_opt.common.scenario_paths, "Scenario file (repeatable)")
      ->required();
  sweep->add_option("--seed", sweep_opt.common.seeds, "Episode seed (repeatable)");
  sweep->add_option("--config", sweep_opt.common.config_path, "JSON run configuration file");
  sweep->add_option("--set", sweep_opt.common.overrides, "Override config key");
  sweep->add_option("--out", sweep_opt.common.out_dir, "Output directory");
  sweep->add_option("--jobs", sweep_opt.common.jobs, "Parallel episodes");
  sweep->add_option("--factor", sweep_opt.factors, "Safety factor (repeatable; default 1 1.5 2)");

  std::vector<std::string> report_paths;
  CLI::App* report = app.add_subcommand("report", "Summarize trace files or directories");
  report->add_option("--trace", report_paths, "Trace file or directory (repeatable)")
      ->required();

  std::string records_path;
  std::string losses_out;
  std::string losses_config;
  std::vector<std::string> losses_overrides;
  CLI::App* eval = app.add_subcommand("eval-losses", "Evaluate losses over (pred, target) records");
  eval->add_option("--records", records_path, "JSONL file of {pred, target} records")->required();
  eval->add_option("--out", losses_out, "CSV output path (default: stdout)");
  eval->add_option("--config", losses_config, "JSON run configuration file");
  eval->add_option("--set", losses_overrides, "Override config key, e.g. loss_weights.pt=1");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_opt);
    if (*sweep) return cmd_sweep(sweep_opt);
    if (*report) return cmd_report(report_paths);
    if (*eval) return cmd_eval_losses(records_path, losses_out, losses_config, losses_overrides);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
