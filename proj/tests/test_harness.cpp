#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "minddreamer/config.hpp"
#include "minddreamer/errors.hpp"
#include "minddreamer/harness.hpp"

using namespace md;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

ExperimentConfig tiny_config(const std::string& out_dir) {
  ExperimentConfig cfg;
  cfg.experiment_name = "tiny";
  cfg.env.kind = "island";
  cfg.env.island = {0.3, 4, 2};
  cfg.agent.episodes = 2;
  cfg.agent.episode_length = 10;
  cfg.agent.plans_per_step = 1;
  cfg.agent.imagination_horizon = 2;
  cfg.seeds = {1, 2, 3};
  cfg.output_dir = out_dir;
  return cfg;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config text parsing: sections, arrays, comments and strings") {
  const std::string text = R"(
# experiment file
experiment_name = "demo"
seeds = [1, 2]

[env]
kind = "island"
epsilon = 0.25
size_a = 4
size_b = 2

[agent]
episodes = 3
buffer_sampled_source = true

[sweep]
env.epsilon = [0.1, 0.2]
)";
  const FlatConfig flat = parse_config_text(text);
  CHECK(std::get<std::string>(flat.at("experiment_name")) == "demo");
  CHECK(std::get<std::vector<double>>(flat.at("seeds")).size() == 2);
  CHECK(std::get<double>(flat.at("env.epsilon")) == 0.25);
  CHECK(std::get<bool>(flat.at("agent.buffer_sampled_source")));

  const ExperimentConfig cfg = experiment_from_flat(flat);
  CHECK(cfg.experiment_name == "demo");
  CHECK(cfg.env.island.epsilon == 0.25);
  CHECK(cfg.agent.episodes == 3);
  REQUIRE(cfg.sweep.size() == 1);
  CHECK(cfg.sweep[0].key == "env.epsilon");
  CHECK(cfg.sweep[0].values == std::vector<double>{0.1, 0.2});

  CHECK_THROWS_AS(parse_config_text("key value-without-equals"), ValidationError);
}

TEST_CASE("config JSON alternative parses to the same flat map") {
  const std::string text = R"({
    "experiment_name": "demo",
    "seeds": [4, 5],
    "env": {"kind": "island", "epsilon": 0.5},
    "agent": {"episodes": 2}
  })";
  const FlatConfig flat = parse_config_json(text);
  CHECK(std::get<std::string>(flat.at("env.kind")) == "island");
  CHECK(std::get<double>(flat.at("env.epsilon")) == 0.5);
  const ExperimentConfig cfg = experiment_from_flat(flat);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{4, 5});
}

TEST_CASE("config validation: duplicate seeds and unknown sweep keys fail early") {
  ExperimentConfig cfg = tiny_config("unused");
  cfg.seeds = {1, 1};
  CHECK_THROWS_AS(cfg.validate(), ValidationError);

  cfg = tiny_config("unused");
  cfg.sweep.push_back({"env.not_a_knob", {1.0}});
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("run_experiment: counting contract and manifest") {
  TempDir dir("md_store_counting");
  const ResultStore store = run_experiment(tiny_config(dir.path.string()));
  CHECK(store.runs.size() == 6);  // 1 env x 2 modes x 3 seeds
  CHECK(fs::exists(dir.path / "manifest.json"));
  CHECK(fs::exists(dir.path / "runs.csv"));
  int files = 0;
  for (const auto& entry : fs::directory_iterator(dir.path))
    if (entry.path().filename().string().rfind("run__", 0) == 0) ++files;
  CHECK(files == 6);
}

TEST_CASE("run_experiment: idempotent re-run leaves files untouched") {
  TempDir dir("md_store_idempotent");
  const ExperimentConfig cfg = tiny_config(dir.path.string());
  run_experiment(cfg);
  std::map<std::string, fs::file_time_type> stamps;
  for (const auto& entry : fs::directory_iterator(dir.path))
    stamps[entry.path().filename().string()] = fs::last_write_time(entry.path());

  const ResultStore again = run_experiment(cfg);
  CHECK(again.runs.size() == 6);
  for (const auto& entry : fs::directory_iterator(dir.path)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("run__", 0) == 0)
      CHECK(fs::last_write_time(entry.path()) == stamps.at(name));
  }
}

TEST_CASE("run_experiment: sweeps enumerate the grid and tag each run") {
  TempDir dir("md_store_sweep");
  ExperimentConfig cfg = tiny_config(dir.path.string());
  cfg.sweep.push_back({"env.epsilon", {0.1, 0.05, 0.01}});
  const ResultStore store = run_experiment(cfg);
  CHECK(store.runs.size() == 3 * 2 * 3);
  int tagged = 0;
  for (const auto& run : store.runs) {
    REQUIRE(run.sweep_point.count("env.epsilon") == 1);
    if (run.sweep_point.at("env.epsilon") == 0.05) ++tagged;
  }
  CHECK(tagged == 6);
}

TEST_CASE("reproducibility: identical configs produce byte-identical run files") {
  TempDir dir_a("md_store_repro_a");
  TempDir dir_b("md_store_repro_b");
  ExperimentConfig cfg = tiny_config(dir_a.path.string());
  run_experiment(cfg);
  cfg.output_dir = dir_b.path.string();
  run_experiment(cfg);
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(dir_a.path)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("run__", 0) != 0 && name != "runs.csv") continue;
    CHECK(slurp(entry.path) == slurp(dir_b.path / name));
    ++compared;
  }
  CHECK(compared == 7);
}

TEST_CASE("reports: files are deterministic, empty stores fail loudly") {
  TempDir dir("md_store_report");
  ExperimentConfig cfg = tiny_config(dir.path.string());
  cfg.sweep.push_back({"env.epsilon", {0.3, 0.1}});
  const ResultStore store = run_experiment(cfg);

  const auto first = emit_report(store, ReportKind::hitting);
  const std::string csv_once = slurp(fs::path(first[0]));
  const std::string svg_once = slurp(fs::path(first[1]));
  const auto second = emit_report(store, ReportKind::hitting);
  CHECK(slurp(fs::path(second[0])) == csv_once);
  CHECK(slurp(fs::path(second[1])) == svg_once);
  CHECK(svg_once.find("<svg") != std::string::npos);

  emit_report(store, ReportKind::returns);
  emit_report(store, ReportKind::speedup);

  ResultStore empty;
  empty.dir = dir.path.string();
  CHECK_THROWS_AS(emit_report(empty, ReportKind::hitting), ValidationError);
}

TEST_CASE("result store round-trips through the filesystem") {
  TempDir dir("md_store_roundtrip");
  const ResultStore written = run_experiment(tiny_config(dir.path.string()));
  const ResultStore loaded = load_result_store(dir.path.string());
  REQUIRE(loaded.runs.size() == written.runs.size());
  for (std::size_t i = 0; i < loaded.runs.size(); ++i) {
    CHECK(loaded.runs[i].mode == written.runs[i].mode);
    CHECK(loaded.runs[i].seed == written.runs[i].seed);
    CHECK(loaded.runs[i].result.first_hit_step == written.runs[i].result.first_hit_step);
    CHECK(loaded.runs[i].result.return_curve == written.runs[i].result.return_curve);
  }
}

TEST_CASE("csv quoting and deterministic float formatting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1e-9) == format_double(1e-9));
}
