// SPDX-License-Identifier: Apache-2.0
//
// diw generate|train|report [--config PATH] [--force] [--seed N]
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "diw/error.hpp"
#include "diw/io/commands.hpp"

namespace {

struct Args {
  std::string config;
  bool force = false;
  std::optional<std::uint64_t> seed;
  std::string run_dir;
};

void add_common(CLI::App* cmd, Args& args) {
  cmd->add_option("--config", args.config, "JSON configuration file");
  cmd->add_flag("--force", args.force, "overwrite existing output");
  cmd->add_option("--seed", args.seed, "override the root seed");
}

diw::io::CommandOptions to_options(const Args& args) {
  diw::io::CommandOptions opts;
  opts.config_path = args.config;
  opts.force = args.force;
  opts.seed = args.seed;
  opts.run_dir = args.run_dir;
  return opts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Importance-weighted training under distribution shift"};
  app.require_subcommand(1);
  Args args;

  CLI::App* generate = app.add_subcommand("generate", "write train/validation/test datasets");
  CLI::App* train = app.add_subcommand("train", "train one method and write metrics");
  CLI::App* report = app.add_subcommand("report", "summarize final weights of a run");
  add_common(generate, args);
  add_common(train, args);
  add_common(report, args);
  report->add_option("--run-dir", args.run_dir, "run directory (default: derived from --config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(diw::ExitCode::kConfig);
  }

  try {
    const diw::io::CommandOptions opts = to_options(args);
    if (generate->parsed()) {
      diw::io::cmd_generate(opts, std::cout);
    } else if (train->parsed()) {
      diw::io::cmd_train(opts, std::cout);
    } else {
      diw::io::cmd_report(opts, std::cout);
    }
  } catch (const diw::Error& e) {
    std::cerr << "diw: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "diw: " << e.what() << "\n";
    return static_cast<int>(diw::ExitCode::kNumeric);
  }
  return 0;
}
