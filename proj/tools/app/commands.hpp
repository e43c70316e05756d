#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace qlimits::app {

/// Files a command produces plus the human-readable summary. Nothing is
/// written to disk until write_outputs().
struct CommandOutput {
  struct File {
    std::string path;
    std::string contents;
  };
  std::vector<File> files;
  std::string summary;
};

inline const std::vector<std::string> kBoundsColumns{
    "model", "N", "sigma_P2", "sigma_Q2", "a", "b",
    "fisher_poisson", "fisher_gauss", "crb_intensity", "crb_field"};

inline const std::vector<std::string> kMcColumns{
    "scheme", "noise_kind", "n_trials", "seed", "true_p",
    "mean_estimate", "std_estimate", "crb", "efficiency_ratio"};

/// <prefix>_bounds.csv and <prefix>_config.
CommandOutput cmd_bounds(const RunConfig& config);
/// <prefix>_mc.csv and <prefix>_config. Requires an [mc] section.
CommandOutput cmd_simulate(const RunConfig& config, unsigned threads = 1);
/// <prefix>_sweep.csv and <prefix>_config. Requires a [sweep] section.
CommandOutput cmd_sweep(const RunConfig& config, unsigned threads = 1);

void write_outputs(const CommandOutput& output);

/// Exit codes of the command line front end.
enum ExitCode : int { kSuccess = 0, kConfigError = 2, kNumericError = 3 };

/// Full command line handling: bounds | simulate | sweep with --config,
/// --seed, --out, --threads (and --axis, --values for sweep).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qlimits::app
