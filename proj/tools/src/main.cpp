#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "nesslab_app/pipeline.hpp"

namespace app = nesslab::app;

int main(int argc, char** argv) {
  CLI::App cli{"nesslab: steady-state current experiments on quantum spin chains"};
  std::string config_path, out_dir, log_level = "info", command;
  int threads = 1;
  cli.add_option("command", command, "build | verify-lr | ness | sumrule | spectral | all")->required();
  cli.add_option("--config", config_path, "experiment config file")->required();
  cli.add_option("--out", out_dir, "output directory (overrides the config)");
  cli.add_option("--threads", threads, "worker threads for dense linear algebra")->check(CLI::PositiveNumber);
  cli.add_option("--log-level", log_level, "trace | debug | info | warn | error | off");
  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : 2;
  }

  spdlog::set_default_logger(spdlog::stderr_color_mt("nesslab"));
  spdlog::set_level(spdlog::level::from_str(log_level));
  Eigen::setNbThreads(threads);

  try {
    const app::Subcommand cmd = app::subcommand_from_string(command);
    app::ExperimentConfig config = app::load_config(config_path);
    if (!out_dir.empty()) config.output = out_dir;
    app::Pipeline pipeline(config, config.output);
    const app::RunResult r = pipeline.run(cmd);
    for (const auto& p : r.artifacts) std::cout << p.string() << "\n";
    if (r.exit_code != 0) {
      std::string failed;
      for (const auto& f : r.failed_checks) failed += (failed.empty() ? "" : ", ") + f;
      std::cout << app::error_json("numerical", "checks failed: " + failed, r.exit_code) << "\n";
    }
    return r.exit_code;
  } catch (const nesslab::Error& e) {
    const int code = app::exit_code_for(e.kind());
    const char* kind = e.kind() == nesslab::ErrorKind::config         ? "config"
                       : e.kind() == nesslab::ErrorKind::precondition ? "precondition"
                                                                      : "numerical";
    spdlog::error("{}", e.what());
    std::cout << app::error_json(kind, e.what(), code) << "\n";
    return code;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    std::cout << app::error_json("internal", e.what(), 1) << "\n";
    return 1;
  }
}
