#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace identlab {

enum class ExperimentKind {
  ConditionalGivenMean,
  MeanVariance,
  MatchedPair,
  RhoNonconsistency,
  MuDistinguish,
  M2Components,
  BinaryDistinguish,
  ChangepointCalibration,
  KmeansConsistency,
};

std::string_view to_string(ExperimentKind kind);
ExperimentKind experiment_from_string(std::string_view name);
const std::vector<ExperimentKind>& all_experiments();

// Top-level config document. `reps` and `n_values` fall back to the
// experiment's defaults when zero/empty; everything else lives in `params`.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::ConditionalGivenMean;
  std::uint64_t seed = 0;
  std::size_t reps = 0;
  std::vector<std::size_t> n_values;
  double ci_level = 0.99;
  std::string output_dir = ".";
  nlohmann::json params = nlohmann::json::object();
};

// Throws Error(ConfigInvalid) on schema violations, including unknown keys.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& config);
// Parses the experiment-specific parameters as well; throws ConfigInvalid.
void validate_config(const ExperimentConfig& config);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct OutputFile {
  std::string name;  // relative to the output directory
  std::string checksum;
};

struct RunManifest {
  std::string experiment;
  std::string config_hash;
  std::string version;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::vector<OutputFile> files;
  std::vector<CheckResult> checks;
  double wall_time_s = 0.0;

  bool passed() const;
};

nlohmann::json manifest_to_json(const RunManifest& m);

struct RunOptions {
  unsigned threads = 0;  // 0: all cores
  bool plots = false;
  std::optional<std::filesystem::path> out_dir;  // overrides config.output_dir
};

// Writes result CSV/JSON files, optional SVG plots and manifest.json into the
// output directory. Built-in checks are recorded in the manifest rather than
// thrown; numerical failures propagate as Error(NumericalFailure).
RunManifest run_experiment(const ExperimentConfig& config, const RunOptions& options);

// Documented CSV columns for every experiment, for --help.
std::string csv_schema_help();

struct Preset {
  std::string name;
  std::string description;
  nlohmann::json config;
};

// Built-in configs, one per experiment, reproducing the acceptance checks.
const std::vector<Preset>& presets();
const Preset& find_preset(std::string_view name);

std::string_view library_version();

}  // namespace identlab
