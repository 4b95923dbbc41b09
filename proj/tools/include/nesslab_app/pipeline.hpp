#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nesslab_app/config.hpp"
#include "nesslab/spectral.hpp"

namespace nesslab::app {

enum class Subcommand { build, verify_lr, ness, sumrule, spectral, all };

Subcommand subcommand_from_string(std::string_view s);
std::string_view to_string(Subcommand s);

struct RunResult {
  int exit_code = 0;  // 0, or 4 when a numerical check misses its tolerance
  std::vector<std::filesystem::path> artifacts;
  std::vector<std::string> failed_checks;
};

/// Runs one stage (or all of them) and writes its artifacts into `out`.
/// Errors surface as ConfigError / PreconditionError / NumericalError.
class Pipeline {
 public:
  Pipeline(ExperimentConfig config, std::filesystem::path out);

  RunResult run(Subcommand cmd);

 private:
  void stage_build(RunResult& r);
  void stage_verify_lr(RunResult& r);
  void stage_ness(RunResult& r);
  void stage_sumrule(RunResult& r);
  void stage_spectral(RunResult& r);

  const StationaryState& state();
  const VerificationReport& report();
  const CurrentCorrelator& correlator();
  void write(RunResult& r, const std::string& name, const std::string& content);
  int scan_gap() const;

  ExperimentConfig config_;
  std::filesystem::path out_;
  Model model_;
  std::optional<StationaryState> state_;
  std::optional<VerificationReport> report_;
  std::unique_ptr<CurrentCorrelator> correlator_;
};

/// Error report printed by the driver: {"error": kind, "message": ..., "exit_code": n}.
std::string error_json(const std::string& kind, const std::string& message, int exit_code);
int exit_code_for(ErrorKind kind);

}  // namespace nesslab::app
