// SPDX-License-Identifier: Apache-2.0
//
// The three commands behind the `diw` tool. Output layout under the output
// root (config output_dir, or $DIW_OUT when set):
//
//   data/{train,validation,test}.{csv,json}   generated datasets
//   data/manifest.json                        seed, task, oracle parameters
//   runs/<run_id>/metrics.csv                 run_id,seed,epoch,metric,value
//   runs/<run_id>/weights.csv                 index,weight,intact,group
//   runs/<run_id>/resolved_config.json
//   runs/<run_id>/summary.json
//   runs/<run_id>/report.json, histogram.csv  written by report
#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "diw/io/config.hpp"
#include "diw/shifts.hpp"
#include "diw/trainer.hpp"

namespace diw::io {

struct CommandOptions {
  std::filesystem::path config_path;
  bool force = false;
  std::optional<std::uint64_t> seed;
  // report only: run directory to summarize; empty derives it from the config.
  std::filesystem::path run_dir;
};

/// Config file with the --seed override applied.
ConfigFile load_command_config(const CommandOptions& options);

/// $DIW_OUT when set and nonempty, else config.output_dir.
std::filesystem::path output_root(const ConfigFile& config);

struct GeneratedTask {
  TaskSplit split;
  std::optional<Eigen::VectorXd> oracle_weights;
};

/// Builds the task described by `task` from `seed`.
GeneratedTask generate_task(const TaskConfig& task, std::uint64_t seed);

std::string manifest_json(const ConfigFile& config, const GeneratedTask& task);
std::string metrics_to_csv(const std::string& run_id, std::uint64_t seed,
                           const RunMetrics& metrics);
std::string weights_to_csv(const WeightVector& weights, const LabeledDataset& train);

/// Each returns the directory it wrote to. Existing outputs are refused with
/// PathError unless options.force is set.
std::filesystem::path cmd_generate(const CommandOptions& options, std::ostream& log);
std::filesystem::path cmd_train(const CommandOptions& options, std::ostream& log);
std::filesystem::path cmd_report(const CommandOptions& options, std::ostream& log);

}  // namespace diw::io
