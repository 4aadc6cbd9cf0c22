#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace safedrive::cli {

struct CommonOptions {
  std::vector<std::string> scenario_paths;
  std::vector<std::uint64_t> seeds;  // empty: each scenario's own seed
  std::string config_path;
  std::vector<std::string> overrides;  // --set key=value
  std::string variant = sim::kVariantFull;
  std::string out_dir = "out";
  int jobs = 0;  // <= 0: hardware concurrency
};

struct SweepOptions {
  CommonOptions common;
  std::vector<double> factors = {1.0, 1.5, 2.0};
};

// Stable column set shared by the per-episode summaries.
std::string summary_csv_header();
std::string summary_csv_row(const sim::ojson& final_rec);

int cmd_run(const CommonOptions& opt);
int cmd_sweep(const SweepOptions& opt);
int cmd_report(const std::vector<std::string>& trace_paths);
int cmd_eval_losses(const std::string& records_path, const std::string& out_path,
                    const std::string& config_path, const std::vector<std::string>& overrides);

// Trace file name for one episode: <stem>_seed<seed>_<variant>.jsonl.
std::string trace_file_name(const std::string& scenario_name, std::uint64_t seed,
                            const std::string& variant);

}  // namespace safedrive::cli
