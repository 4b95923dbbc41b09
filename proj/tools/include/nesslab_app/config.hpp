#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nesslab/chain.hpp"
#include "nesslab/models.hpp"
#include "nesslab/steady_state.hpp"
#include "nesslab/window.hpp"

namespace nesslab::app {

inline constexpr int kSchemaVersion = 1;

struct ModelConfig {
  enum class Kind { xx, xxz, fermion };
  Kind kind = Kind::xx;
  double lambda_aniso = 1.0;
  double t_hop = 1.0;
  std::vector<double> v;

  Model build() const;
};

struct ScanConfig {
  std::vector<int> x_values;
  std::vector<double> t_values;
  std::vector<int> M_values;
  int gap = 0;  // L - M in the M scan; 0 keeps the geometry's gap
  std::vector<double> flat_times;
  std::vector<double> eps_windows;
  std::vector<int> singularity_sizes;
};

struct CheckConfig {
  double sumrule_tol = 0.05;
  double derivative_tol = 0.1;
  double current_threshold = 1e-6;
};

/// Everything needed to reproduce a run. Parsed from INI-style text with
/// [model], [chain], [bias], [geometry], [window], [scan] and [checks]
/// tables; NESSLAB_<TABLE>_<KEY> environment variables override entries.
struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::uint64_t seed = 0;
  std::string output = "out";
  ModelConfig model;
  ChainConfig chain{12, 2, Boundary::periodic};
  BiasSpec bias;
  CurrentGeometry geometry{7, 3, 1, true};
  WindowFunction window;
  ScanConfig scan;
  CheckConfig checks;

  /// Cross-field checks; throws ConfigError or PreconditionError.
  void validate() const;
  /// Geometry with the model's interaction range filled in.
  CurrentGeometry geometry_for(int L, int M) const;
};

ExperimentConfig parse_config(const std::string& text, bool env_overrides = true);
ExperimentConfig load_config(const std::filesystem::path& path, bool env_overrides = true);
std::string serialize_config(const ExperimentConfig& c);

std::string_view to_string(ModelConfig::Kind k);

}  // namespace nesslab::app
