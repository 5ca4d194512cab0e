#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "symchaos/complexity.hpp"
#include "symchaos/esn.hpp"
#include "symchaos/fidelity.hpp"
#include "symchaos/lyapunov.hpp"
#include "symchaos/models.hpp"
#include "symchaos/sweep.hpp"
#include "symchaos/symbolic.hpp"

namespace symchaos::cli {

/// Which defaults a command starts from.
enum class CommandGroup { Basic, Sweep, Esn };

/// Every setting the CLI understands. Keys are "section.name".
struct RunConfig {
  ModelKind kind = ModelKind::Lorenz;
  LorenzParams<double> lorenz{};
  RosslerParams<double> rossler{};
  IntegratorConfig integrator{};
  State3<double> s0 = State3<double>::Ones();
  SymbolPipeline pipeline{};
  ComplexityOptions measure{};
  bool measure_lyapunov = false;
  LyapunovConfig lyapunov{};

  std::string sweep_param = "r";
  double sweep_lo = 28.0, sweep_hi = 100.0, sweep_step = 0.25;
  std::size_t symbols_target = 10000;
  double max_time = 1e5;
  WindowCriteria windows{};

  EsnHyperParams esn{};
  double input_noise_std = 0.0;
  std::uint64_t noise_seed = 0;
  Eigen::Index horizon = 100000;
  std::string esn_file;  // empty: <output_dir>/esn.txt
  bool write_trajectory = false;

  SearchSpec search{};
  std::size_t refine_candidates = 50;
  Eigen::Index refine_horizon = 168000;
  Eigen::Index report_horizon = 1000000;
  int report_m_max = 6;
  int map_bins = 50;

  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string output_dir = "out";

  Model<double> model() const;
  SweepSpec sweep_spec() const;
  SurrogateSetup surrogate_setup() const;
};

RunConfig default_config(CommandGroup group, ModelKind kind);

/// Parsed "key = value" entries with the line each came from.
struct ConfigEntry {
  std::string value;
  std::string origin;  // "file:line" or "--set"
};
using ConfigEntries = std::map<std::string, ConfigEntry>;

/// Parses the text format: [section] headers, key = value lines, '#' comments.
/// Syntax errors and duplicate keys raise ConfigError naming the line.
ConfigEntries parse_config_text(const std::string& text, const std::string& source);

/// Adds a "section.key=value" override; later overrides replace earlier ones.
void add_override(ConfigEntries& entries, const std::string& assignment);

/// Starts from the defaults for the group and the model kind named in
/// `entries`, then applies every entry. Unknown keys and unparsable values
/// raise ConfigError naming the key and its origin.
RunConfig resolve_config(CommandGroup group, const ConfigEntries& entries);

/// Full key = value listing of a configuration, grouped by section.
std::string dump_config(const RunConfig& config, const std::string& header = {});

}  // namespace symchaos::cli
