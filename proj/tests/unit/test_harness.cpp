#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "identlab/error.hpp"
#include "identlab/harness.hpp"
#include "identlab/report.hpp"

using namespace identlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("identlab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

ErrorCode config_code(const json& doc) {
  try {
    validate_config(parse_config(doc));
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::NumericalFailure;
}

json small_mu_config() {
  return json{{"experiment", "mu-distinguish"},
              {"seed", 42},
              {"reps", 2000},
              {"n_values", {20}},
              {"params", {{"rho_values", {0.0, 0.5}}}}};
}

}  // namespace

TEST_CASE("experiment names round-trip") {
  for (ExperimentKind k : all_experiments()) CHECK(experiment_from_string(to_string(k)) == k);
  CHECK(all_experiments().size() == 9);
  CHECK_THROWS_AS(experiment_from_string("nope"), Error);
}

TEST_CASE("config validation rejects malformed documents") {
  CHECK(config_code(json{{"experiment", "mean-variance"}}) == ErrorCode::ConfigInvalid);
  CHECK(config_code(json{{"experiment", "mean-variance"}, {"seed", 1}, {"extra", 1}}) == ErrorCode::ConfigInvalid);
  CHECK(config_code(json{{"experiment", "mean-variance"}, {"seed", -1}}) == ErrorCode::ConfigInvalid);
  CHECK(config_code(json{{"experiment", "mean-variance"}, {"seed", 1}, {"params", {{"rho", 1.5}}}}) ==
        ErrorCode::ConfigInvalid);
  CHECK(config_code(json{{"experiment", "mean-variance"}, {"seed", 1}, {"params", {{"typo", 1}}}}) ==
        ErrorCode::ConfigInvalid);
  CHECK(config_code(json{{"experiment", "mean-variance"}, {"seed", 1}, {"ci_level", 1.5}}) == ErrorCode::ConfigInvalid);
  CHECK(config_code(json{{"experiment", "kmeans-consistency"}, {"seed", 1}, {"params", {{"mixture_sd", "one"}}}}) ==
        ErrorCode::ConfigInvalid);
}

TEST_CASE("every preset validates") {
  for (const Preset& p : presets()) {
    CAPTURE(p.name);
    const ExperimentConfig c = parse_config(p.config);
    CHECK_NOTHROW(validate_config(c));
    CHECK(to_string(c.experiment) == p.name);
  }
  CHECK_THROWS_AS(find_preset("missing"), Error);
}

TEST_CASE("config round-trips through json") {
  const ExperimentConfig c = parse_config(small_mu_config());
  const ExperimentConfig back = parse_config(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
}

TEST_CASE("reruns are byte-identical and independent of the thread count") {
  const ExperimentConfig c = parse_config(small_mu_config());
  const fs::path a = scratch("rerun_a");
  const fs::path b = scratch("rerun_b");
  const RunManifest ma = run_experiment(c, {.threads = 1, .plots = true, .out_dir = a});
  const RunManifest mb = run_experiment(c, {.threads = 3, .plots = true, .out_dir = b});
  CHECK(ma.passed());
  REQUIRE(ma.files.size() == mb.files.size());
  for (std::size_t i = 0; i < ma.files.size(); ++i) {
    CHECK(ma.files[i].name == mb.files[i].name);
    CHECK(ma.files[i].checksum == mb.files[i].checksum);
  }
  CHECK(slurp(a / "distinguish.csv") == slurp(b / "distinguish.csv"));
  CHECK(ma.config_hash == mb.config_hash);
  CHECK(fs::exists(a / "manifest.json"));
  const json manifest = json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["experiment"] == "mu-distinguish");
  CHECK(manifest["passed"] == true);
  CHECK(manifest["files"].size() == ma.files.size());
}

TEST_CASE("distinguish csv has the documented columns") {
  const fs::path out = scratch("columns");
  run_experiment(parse_config(small_mu_config()), {.threads = 1, .out_dir = out});
  const CsvTable t = CsvTable::read(out / "distinguish.csv");
  CHECK(t.columns() ==
        std::vector<std::string>{"set", "n", "reps", "p1_hat", "p1_lo", "p1_hi", "p2_hat", "p2_lo", "p2_hi", "verdict"});
  CHECK(t.rows().size() == 4);
}

TEST_CASE("a different seed changes the results") {
  json other = small_mu_config();
  other["seed"] = 43;
  const fs::path a = scratch("seed_a");
  const fs::path b = scratch("seed_b");
  run_experiment(parse_config(small_mu_config()), {.threads = 1, .out_dir = a});
  run_experiment(parse_config(other), {.threads = 1, .out_dir = b});
  CHECK(slurp(a / "distinguish.csv") != slurp(b / "distinguish.csv"));
}

TEST_CASE("failing checks are recorded, not thrown") {
  json doc{{"experiment", "rho-nonconsistency"},
           {"seed", 1},
           {"reps", 200},
           {"n_values", {100, 1000}},
           {"params", {{"seq_counts", {10, 20}}, {"pooled_reps", 50}, {"pooled_shrink_min", 100.0}}}};
  const RunManifest m = run_experiment(parse_config(doc), {.threads = 1, .out_dir = scratch("failing")});
  CHECK_FALSE(m.passed());
}

TEST_CASE("csv helpers") {
  CsvTable t({"a", "b"});
  t.row({"1", "x,y"});
  CHECK(t.str() == "a,b\n1,\"x,y\"\n");
  CHECK_THROWS_AS(t.row({"1"}), Error);
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(std::size_t{12}) == "12");
  CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
}

#ifdef IDENTLAB_TOOL_PATH
namespace {

int run_tool(const std::string& args) {
  const std::string tool = IDENTLAB_TOOL_PATH;
  const int status = std::system((tool + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const json& doc) {
  static const fs::path dir = scratch("cli");
  const fs::path p = dir / name;
  std::ofstream(p) << doc.dump();
  return p;
}

}  // namespace

TEST_CASE("cli exit codes") {
  if (std::string(IDENTLAB_TOOL_PATH).empty()) return;
  CHECK(run_tool("presets") == 0);
  const fs::path good = write_config("good.json", small_mu_config());
  CHECK(run_tool("validate " + good.string()) == 0);
  CHECK(run_tool("run " + good.string() + " --threads 2 --out " + (good.parent_path() / "out").string()) == 0);

  json bad = small_mu_config();
  bad["params"]["rho_values"] = {2.0};
  const fs::path badp = write_config("bad.json", bad);
  CHECK(run_tool("validate " + badp.string()) == 2);
  CHECK(run_tool("run " + badp.string()) == 2);
  CHECK(run_tool("run /nonexistent/config.json") == 2);
  json tiny{{"experiment", "kmeans-consistency"}, {"seed", 1}, {"params", {{"approx_budget", 12}}}};
  CHECK(run_tool("validate " + write_config("tiny.json", tiny).string()) == 2);

  json failing{{"experiment", "rho-nonconsistency"},
               {"seed", 1},
               {"reps", 200},
               {"n_values", {100, 1000}},
               {"params", {{"seq_counts", {10, 20}}, {"pooled_reps", 50}, {"pooled_shrink_min", 100.0}}}};
  const fs::path fp = write_config("fail.json", failing);
  CHECK(run_tool("run " + fp.string() + " --out " + (fp.parent_path() / "fail_out").string()) == 4);

  // too few reference points per Voronoi cell is a numerical failure
  json numeric{{"experiment", "kmeans-consistency"},
               {"seed", 1},
               {"reps", 5},
               {"n_values", {10}},
               {"params",
                {{"mixture_means", {0.0, 100.0}},
                 {"mixture_weights", {0.995, 0.005}},
                 {"approx_budget", 1000},
                 {"toy_datasets", 1},
                 {"toy_min_equal", 1}}}};
  const fs::path np = write_config("numeric.json", numeric);
  CHECK(run_tool("run " + np.string() + " --out " + (np.parent_path() / "num_out").string()) == 3);
}
#endif
