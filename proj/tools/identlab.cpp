#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "identlab/error.hpp"
#include "identlab/harness.hpp"

namespace {

enum Exit : int { kOk = 0, kConfig = 2, kNumeric = 3, kCheckFailed = 4 };

int exit_code_for(const identlab::Error& e) {
  switch (e.code()) {
    case identlab::ErrorCode::ConfigInvalid:
      return kConfig;
    case identlab::ErrorCode::CheckFailed:
      return kCheckFailed;
    default:
      return kNumeric;
  }
}

void print_summary(const identlab::RunManifest& m, const std::filesystem::path& out) {
  std::cout << m.experiment << "  seed=" << m.seed << "  threads=" << m.threads << "  " << m.config_hash << '\n';
  for (const auto& c : m.checks) {
    std::cout << "  [" << (c.passed ? "ok" : "FAIL") << "] " << c.name;
    if (!c.detail.empty()) std::cout << "  (" << c.detail << ')';
    std::cout << '\n';
  }
  std::cout << "wrote " << m.files.size() << " files to " << out.string() << " in " << m.wall_time_s << " s\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"identlab: simulation harness for identifiability experiments"};
  app.set_version_flag("--version", std::string(identlab::library_version()));
  app.require_subcommand(1);
  app.footer(identlab::csv_schema_help());

  std::string config_path;
  unsigned threads = 0;
  bool plots = false;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "run an experiment and write CSV/JSON results plus manifest.json");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--threads", threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  run->add_flag("--plots", plots, "also render SVG plots");
  run->add_option("--out", out_dir, "output directory (overrides output_dir in the config)");

  auto* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("config", config_path, "experiment config (JSON)")->required();

  auto* list = app.add_subcommand("presets", "print the built-in preset configs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (list->parsed()) {
      nlohmann::json all = nlohmann::json::object();
      for (const auto& p : identlab::presets()) {
        all[p.name] = {{"description", p.description}, {"config", p.config}};
      }
      std::cout << all.dump(2) << '\n';
      return kOk;
    }

    const identlab::ExperimentConfig config = identlab::load_config(config_path);
    if (validate->parsed()) {
      identlab::validate_config(config);
      std::cout << config_path << ": ok (" << identlab::to_string(config.experiment) << ")\n";
      return kOk;
    }

    identlab::RunOptions options;
    options.threads = threads;
    options.plots = plots;
    if (!out_dir.empty()) options.out_dir = out_dir;
    const identlab::RunManifest manifest = identlab::run_experiment(config, options);
    print_summary(manifest, options.out_dir.value_or(config.output_dir));
    return manifest.passed() ? kOk : kCheckFailed;
  } catch (const identlab::Error& e) {
    std::cerr << "identlab: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "identlab: " << e.what() << '\n';
    return kNumeric;
  }
}
