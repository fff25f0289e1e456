#pragma once

#include <map>
#include <string>
#include <vector>

#include "minddreamer/agent.hpp"
#include "minddreamer/config.hpp"

namespace md {

inline constexpr char kCodeVersion[] = "0.1.0";
inline constexpr int kRunSchemaVersion = 1;
inline constexpr char kWorkerEnvVar[] = "MINDDREAMER_WORKERS";

struct StoredRun {
  std::string mode;
  std::uint64_t seed = 0;
  std::map<std::string, double> sweep_point;  // axis key -> value (empty without sweep)
  std::string file;                           // run file name within the store
  RunResult result;
};

struct ResultStore {
  std::string dir;
  std::string experiment_name;
  std::uint64_t config_hash = 0;
  std::vector<StoredRun> runs;  // sorted by (sweep label, mode, seed)
};

// Label such as "env.epsilon=0.05" used in file names and report grouping.
std::string sweep_label(const std::map<std::string, double>& point);

// Executes every (sweep point, mode, seed) cell, writing the manifest first,
// one JSON file per run and an aggregated runs.csv. Completed cells are
// skipped by key, so re-running a finished store is a no-op.
ResultStore run_experiment(const ExperimentConfig& config);

ResultStore load_result_store(const std::string& dir);

// Report emission: aggregated CSV plus an SVG chart per kind.
enum class ReportKind { hitting, returns, speedup };
ReportKind report_kind_from_string(const std::string& name);

// Returns the list of files written. Throws ValidationError when the store
// holds no data for the requested kind.
std::vector<std::string> emit_report(const ResultStore& store, ReportKind kind);

// Deterministic shortest round-trip formatting used by every emitted file.
std::string format_double(double value);

// RFC-4180 CSV field quoting.
std::string csv_field(const std::string& value);

std::uint64_t hash_string(const std::string& text);

}  // namespace md
