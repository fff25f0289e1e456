#include "minddreamer/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "minddreamer/errors.hpp"
#include "minddreamer/rng.hpp"

namespace md {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "nan";
  return {buf, ptr};
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::uint64_t hash_string(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string sweep_label(const std::map<std::string, double>& point) {
  if (point.empty()) return "base";
  std::string label;
  for (const auto& [key, value] : point) {
    if (!label.empty()) label += ";";
    label += key + "=" + format_double(value);
  }
  return label;
}

namespace {

std::string sanitize(const std::string& label) {
  std::string out;
  for (char c : label)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
  return out;
}

json config_to_json(const ExperimentConfig& cfg) {
  json env{{"kind", cfg.env.kind},
           {"epsilon", cfg.env.island.epsilon},
           {"size_a", cfg.env.island.size_a},
           {"size_b", cfg.env.island.size_b},
           {"width", cfg.env.bottleneck_width},
           {"height", cfg.env.bottleneck_height},
           {"corridor_width", cfg.env.bottleneck_corridor},
           {"grid_resolution", cfg.env.three_ring.grid_resolution},
           {"drift_strength", cfg.env.three_ring.drift_strength},
           {"ring_radii", cfg.env.three_ring.ring_radii},
           {"ring_rewards", cfg.env.three_ring.ring_rewards},
           {"goal_ring", cfg.env.goal_ring},
           {"custom_path", cfg.env.custom_path}};
  const AgentConfig& a = cfg.agent;
  json agent{{"imagination_horizon", a.imagination_horizon},
             {"relay_horizon", a.relay_horizon},
             {"target_update_period", a.target_update_period},
             {"target_update_fraction", a.target_update_fraction},
             {"generator_update_ratio", a.generator_update_ratio},
             {"episodes", a.episodes},
             {"episode_length", a.episode_length},
             {"epsilon_greedy", a.epsilon_greedy},
             {"q_step", a.q_step},
             {"epistemic_bonus", a.epistemic_bonus},
             {"plans_per_step", a.plans_per_step},
             {"pseudocount", a.pseudocount},
             {"her_step", a.her_step},
             {"eta", a.eta},
             {"beta", a.beta},
             {"lambda_mf", a.lambda_mf},
             {"margin", a.margin},
             {"temperature", a.temperature},
             {"generator_step", a.generator_step},
             {"negatives_per_update", a.negatives_per_update},
             {"elite_size", a.elite_size},
             {"buffer_sampled_source", a.buffer_sampled_source}};
  json sweep = json::array();
  for (const auto& axis : cfg.sweep)
    sweep.push_back(json{{"key", axis.key}, {"values", axis.values}});
  return json{{"experiment_name", cfg.experiment_name},
              {"output_dir", cfg.output_dir},
              {"seeds", cfg.seeds},
              {"modes", cfg.modes},
              {"env", env},
              {"agent", agent},
              {"sweep", sweep}};
}

json result_to_json(const RunResult& result) {
  json metrics = json::object();
  for (const auto& [name, series] : result.metric_series) metrics[name] = series;
  return json{{"mode", result.mode},
              {"first_hit_step", result.first_hit_step},
              {"hit_censored", result.hit_censored},
              {"budget_steps", result.budget_steps},
              {"return_curve", result.return_curve},
              {"anchor_history", result.anchor_history},
              {"metric_series", metrics}};
}

RunResult result_from_json(const json& doc) {
  RunResult result;
  result.mode = doc.at("mode").get<std::string>();
  result.first_hit_step = doc.at("first_hit_step").get<long>();
  result.hit_censored = doc.at("hit_censored").get<bool>();
  result.budget_steps = doc.at("budget_steps").get<long>();
  result.return_curve = doc.at("return_curve").get<std::vector<double>>();
  result.anchor_history = doc.at("anchor_history").get<std::vector<int>>();
  for (const auto& [name, series] : doc.at("metric_series").items())
    result.metric_series[name] = series.get<std::vector<double>>();
  return result;
}

struct Cell {
  std::map<std::string, double> sweep_point;
  std::string mode;
  std::uint64_t seed;
  std::string file_name;
};

std::vector<std::map<std::string, double>> sweep_grid(const std::vector<SweepAxis>& axes) {
  std::vector<std::map<std::string, double>> points{{}};
  for (const auto& axis : axes) {
    std::vector<std::map<std::string, double>> extended;
    for (const auto& base : points)
      for (double value : axis.values) {
        auto point = base;
        point[axis.key] = value;
        extended.push_back(std::move(point));
      }
    points = std::move(extended);
  }
  return points;
}

int worker_count(std::size_t cells) {
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv(kWorkerEnvVar)) {
    try {
      workers = std::stoi(env);
    } catch (const std::exception&) {
      throw ValidationError(std::string("harness: bad ") + kWorkerEnvVar + " value");
    }
  }
  workers = std::max(1, workers);
  return static_cast<int>(std::min<std::size_t>(workers, std::max<std::size_t>(cells, 1)));
}

void sort_runs(std::vector<StoredRun>& runs) {
  std::sort(runs.begin(), runs.end(), [](const StoredRun& a, const StoredRun& b) {
    const std::string la = sweep_label(a.sweep_point);
    const std::string lb = sweep_label(b.sweep_point);
    if (la != lb) return la < lb;
    if (a.mode != b.mode) return a.mode < b.mode;
    return a.seed < b.seed;
  });
}

void write_runs_csv(const ResultStore& store, const std::vector<std::string>& axis_keys) {
  std::ofstream csv(fs::path(store.dir) / "runs.csv", std::ios::binary);
  csv << "experiment";
  for (const auto& key : axis_keys) csv << "," << csv_field(key);
  csv << ",mode,seed,first_hit_step,hit_censored,budget_steps,final_return,mean_return\r\n";
  for (const auto& run : store.runs) {
    csv << csv_field(store.experiment_name);
    for (const auto& key : axis_keys) {
      const auto it = run.sweep_point.find(key);
      csv << "," << (it == run.sweep_point.end() ? "" : format_double(it->second));
    }
    double mean = 0.0;
    for (double r : run.result.return_curve) mean += r;
    if (!run.result.return_curve.empty()) mean /= static_cast<double>(run.result.return_curve.size());
    const double last = run.result.return_curve.empty() ? 0.0 : run.result.return_curve.back();
    csv << "," << run.mode << "," << run.seed << "," << run.result.first_hit_step << ","
        << (run.result.hit_censored ? "true" : "false") << "," << run.result.budget_steps << ","
        << format_double(last) << "," << format_double(mean) << "\r\n";
  }
}

}  // namespace

ResultStore run_experiment(const ExperimentConfig& config) {
  config.validate();
  ResultStore store;
  store.dir = config.output_dir;
  store.experiment_name = config.experiment_name;

  std::error_code ec;
  fs::create_directories(store.dir, ec);
  if (ec || !fs::is_directory(store.dir))
    throw ValidationError("harness: cannot create output dir " + store.dir);
  {
    std::ofstream probe(fs::path(store.dir) / ".writable", std::ios::binary);
    if (!probe) throw ValidationError("harness: output dir not writable: " + store.dir);
  }
  fs::remove(fs::path(store.dir) / ".writable", ec);

  const json config_json = config_to_json(config);
  {
    json hashed = config_json;  // stores stay relocatable: the path is not hashed
    hashed.erase("output_dir");
    store.config_hash = hash_string(hashed.dump());
  }

  // Manifest goes down before any run starts.
  {
    json manifest{{"schema_version", kRunSchemaVersion},
                  {"code_version", kCodeVersion},
                  {"rng_algorithm", kRngAlgorithmId},
                  {"experiment_name", config.experiment_name},
                  {"config", config_json},
                  {"config_hash", store.config_hash}};
    std::ofstream out(fs::path(store.dir) / "manifest.json", std::ios::binary);
    out << manifest.dump(2) << "\n";
  }

  std::vector<Cell> cells;
  for (const auto& point : sweep_grid(config.sweep))
    for (const auto& mode : config.modes)
      for (std::uint64_t seed : config.seeds) {
        Cell cell{point, mode, seed, ""};
        cell.file_name = "run__" + sanitize(sweep_label(point)) + "__" + mode + "__seed" +
                         std::to_string(seed) + ".json";
        cells.push_back(std::move(cell));
      }

  std::vector<StoredRun> runs(cells.size());
  std::atomic<std::size_t> cursor{0};
  const int workers = worker_count(cells.size());

  auto execute = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      StoredRun& slot = runs[i];
      slot.mode = cell.mode;
      slot.seed = cell.seed;
      slot.sweep_point = cell.sweep_point;
      slot.file = cell.file_name;

      const fs::path path = fs::path(store.dir) / cell.file_name;
      if (fs::exists(path)) {  // idempotent re-run: completed cells are skipped
        std::ifstream in(path);
        json doc;
        in >> doc;
        slot.result = result_from_json(doc.at("result"));
        continue;
      }

      ExperimentConfig cell_config = config;
      cell_config.sweep.clear();
      for (const auto& [key, value] : cell.sweep_point)
        apply_override(cell_config, key, value);
      const BuiltEnv env = build_env(cell_config.env);

      const std::uint64_t key =
          derive_key(derive_key(derive_key(derive_key(store.config_hash,
                                                      hash_string(sweep_label(cell.sweep_point))),
                                           hash_string(cell.mode)),
                                cell.seed),
                     0);
      const TrainMode mode =
          cell.mode == "MD" ? TrainMode::MindDreamer : TrainMode::Baseline;
      slot.result =
          train(env.mdp, env.goal_region, env.start_state, mode, cell_config.agent, Rng(key));

      json run_doc{{"schema_version", kRunSchemaVersion},
                   {"experiment_name", config.experiment_name},
                   {"config_hash", store.config_hash},
                   {"mode", cell.mode},
                   {"seed", cell.seed},
                   {"sweep", cell.sweep_point},
                   {"result", result_to_json(slot.result)}};
      std::ofstream out(path, std::ios::binary);
      out << run_doc.dump(2) << "\n";
    }
  };

  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(execute);
  execute();
  for (auto& t : pool) t.join();

  store.runs = std::move(runs);
  sort_runs(store.runs);

  std::vector<std::string> axis_keys;
  for (const auto& axis : config.sweep) axis_keys.push_back(axis.key);
  write_runs_csv(store, axis_keys);
  return store;
}

ResultStore load_result_store(const std::string& dir) {
  ResultStore store;
  store.dir = dir;
  const fs::path manifest_path = fs::path(dir) / "manifest.json";
  if (!fs::exists(manifest_path))
    throw ValidationError("harness: no manifest in " + dir);
  {
    std::ifstream in(manifest_path);
    json manifest;
    in >> manifest;
    store.experiment_name = manifest.at("experiment_name").get<std::string>();
    store.config_hash = manifest.at("config_hash").get<std::uint64_t>();
  }
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("run__", 0) == 0 && entry.path().extension() == ".json")
      files.push_back(name);
  }
  std::sort(files.begin(), files.end());
  for (const auto& name : files) {
    std::ifstream in(fs::path(dir) / name);
    json doc;
    in >> doc;
    StoredRun run;
    run.mode = doc.at("mode").get<std::string>();
    run.seed = doc.at("seed").get<std::uint64_t>();
    run.file = name;
    for (const auto& [key, value] : doc.at("sweep").items())
      run.sweep_point[key] = value.get<double>();
    run.result = result_from_json(doc.at("result"));
    store.runs.push_back(std::move(run));
  }
  sort_runs(store.runs);
  return store;
}

ReportKind report_kind_from_string(const std::string& name) {
  if (name == "hitting") return ReportKind::hitting;
  if (name == "returns") return ReportKind::returns;
  if (name == "speedup") return ReportKind::speedup;
  throw ValidationError("report: unknown kind " + name + " (hitting|returns|speedup)");
}

}  // namespace md
