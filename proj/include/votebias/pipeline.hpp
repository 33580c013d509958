#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "votebias/netbuild.hpp"
#include "votebias/predict.hpp"

namespace votebias {

enum class Subcommand { Ingest, Thresholds, Networks, Stats, Communities, Mine, Correlate, Evaluate, Export, All };

std::string_view to_string(Subcommand command);
Subcommand parse_subcommand(std::string_view text);

inline constexpr Subcommand kAllSubcommands[] = {
    Subcommand::Ingest,    Subcommand::Thresholds, Subcommand::Networks, Subcommand::Stats,
    Subcommand::Communities, Subcommand::Mine,     Subcommand::Correlate, Subcommand::Evaluate,
    Subcommand::Export,    Subcommand::All};

struct RunConfig {
  std::filesystem::path votes;
  std::filesystem::path adjacency;
  std::filesystem::path odds;
  std::filesystem::path aliases;
  std::filesystem::path schemes;  ///< empty: SchemeTimeline::defaults()
  std::filesystem::path out = "out";

  std::vector<int> lengths = kDefaultWindowLengths;
  std::vector<Method> methods{Method::Gatherer, Method::Average};
  int iterations = 100000;
  double conf_up = 1.0;
  double conf_low = 90.0;
  std::optional<std::uint64_t> seed;
  std::vector<double> betas{0.0, 0.2, 0.5, 1.0};
  StageSet stages = default_stages();
  double min_support = 0.05;
  int lookback_years = kDefaultLookbackYears;
  double overshoot_fraction = kDefaultOvershootFraction;
  int workers = 1;
};

/// Reads a JSON config. Keys mirror the RunConfig fields; relative paths are
/// resolved against the config file's directory. Unknown keys are errors.
RunConfig load_config(const std::filesystem::path& path);

/// One message per problem; empty when `config` can run `command`.
std::vector<std::string> validate(const RunConfig& config, Subcommand command);

/// SHA-256 over the analysis parameters and the contents of the input files.
/// Output directory and worker count are excluded: they do not change results.
std::string config_hash(const RunConfig& config);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct RunResult {
  std::vector<std::filesystem::path> artifacts;  ///< relative to the output directory
  std::vector<std::string> warnings;
};

/// Runs one subcommand and writes its artifacts plus `manifest.json` under
/// config.out. On any error the files written so far are removed and the
/// exception propagates. `log` receives progress and warnings.
RunResult run(const RunConfig& config, Subcommand command, std::ostream& log);

}  // namespace votebias
