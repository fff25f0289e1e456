#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "minddreamer/errors.hpp"
#include "minddreamer/harness.hpp"
#include "minddreamer/verify.hpp"

namespace {
constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfigError = 2;
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular relay-potential simulator and theorem harness"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Execute all cells of an experiment config");
  run_cmd->add_option("config", config_path, "experiment config file (text or JSON)")
      ->required();

  std::string sweep_config_path;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment that must define a sweep");
  sweep_cmd->add_option("config", sweep_config_path, "experiment config file")->required();

  std::string suite = "all";
  auto* verify_cmd = app.add_subcommand("verify", "Run the theorem and invariant checks");
  verify_cmd->add_option("suite", suite, "all|potentials|efe|sampler|topology");

  std::string store_dir;
  std::string kind = "hitting";
  auto* report_cmd = app.add_subcommand("report", "Emit CSV/SVG reports from a result store");
  report_cmd->add_option("store", store_dir, "result store directory")->required();
  report_cmd->add_option("--kind", kind, "hitting|returns|speedup");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (run_cmd->parsed() || sweep_cmd->parsed()) {
      const std::string& path = run_cmd->parsed() ? config_path : sweep_config_path;
      const md::ExperimentConfig config = md::load_experiment_config(path);
      if (sweep_cmd->parsed() && config.sweep.empty())
        throw md::ValidationError("sweep: config defines no sweep axes");
      const md::ResultStore store = md::run_experiment(config);
      std::printf("experiment %s: %zu runs in %s\n", store.experiment_name.c_str(),
                  store.runs.size(), store.dir.c_str());
      return kExitOk;
    }
    if (verify_cmd->parsed()) {
      const auto results = md::run_verify_suite(suite);
      const int failures = md::print_check_results(results);
      return failures == 0 ? kExitOk : kExitCheckFailure;
    }
    if (report_cmd->parsed()) {
      const md::ResultStore store = md::load_result_store(store_dir);
      const auto files = md::emit_report(store, md::report_kind_from_string(kind));
      for (const auto& file : files) std::printf("wrote %s\n", file.c_str());
      return kExitOk;
    }
  } catch (const md::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitCheckFailure;
  }
  return kExitConfigError;
}
