#include "minddreamer/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "minddreamer/errors.hpp"

namespace md {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

ConfigValue parse_scalar(const std::string& raw) {
  const std::string v = trim(raw);
  if (v.empty()) throw ValidationError("config: empty value");
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw ValidationError("config: unterminated string: " + v);
    return v.substr(1, v.size() - 2);
  }
  try {
    std::size_t used = 0;
    const double num = std::stod(v, &used);
    if (used == v.size()) return num;
  } catch (const std::exception&) {
  }
  throw ValidationError("config: cannot parse value: " + v);
}

ConfigValue parse_value(const std::string& raw) {
  const std::string v = trim(raw);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') throw ValidationError("config: unterminated array: " + v);
    std::vector<double> nums;
    std::vector<std::string> strs;
    bool is_string = false;
    std::string inner = v.substr(1, v.size() - 2);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string t = trim(item);
      if (t.empty()) continue;
      const ConfigValue sv = parse_scalar(t);
      if (std::holds_alternative<std::string>(sv)) {
        is_string = true;
        strs.push_back(std::get<std::string>(sv));
      } else if (std::holds_alternative<double>(sv)) {
        nums.push_back(std::get<double>(sv));
      } else {
        throw ValidationError("config: arrays hold numbers or strings");
      }
    }
    if (is_string) {
      if (!nums.empty()) throw ValidationError("config: mixed array types");
      return strs;
    }
    return nums;
  }
  return parse_scalar(v);
}

void flatten_json(const nlohmann::json& node, const std::string& prefix, FlatConfig& out) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items())
      flatten_json(value, prefix.empty() ? key : prefix + "." + key, out);
    return;
  }
  if (node.is_array()) {
    if (!node.empty() && node.front().is_string()) {
      std::vector<std::string> strs;
      for (const auto& v : node) strs.push_back(v.get<std::string>());
      out[prefix] = strs;
    } else {
      std::vector<double> nums;
      for (const auto& v : node) nums.push_back(v.get<double>());
      out[prefix] = nums;
    }
    return;
  }
  if (node.is_boolean()) {
    out[prefix] = node.get<bool>();
  } else if (node.is_number()) {
    out[prefix] = node.get<double>();
  } else if (node.is_string()) {
    out[prefix] = node.get<std::string>();
  } else {
    throw ValidationError("config: unsupported JSON value at " + prefix);
  }
}

}  // namespace

FlatConfig parse_config_text(const std::string& text) {
  FlatConfig flat;
  std::string section;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ValidationError("config line " + std::to_string(line_no) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw ValidationError("config line " + std::to_string(line_no) + ": empty key");
    if (key.front() == '"' && key.back() == '"' && key.size() >= 2)
      key = key.substr(1, key.size() - 2);
    const std::string full = section.empty() ? key : section + "." + key;
    flat[full] = parse_value(line.substr(eq + 1));
  }
  return flat;
}

FlatConfig parse_config_json(const std::string& text) {
  FlatConfig flat;
  const auto parsed = nlohmann::json::parse(text);
  flatten_json(parsed, "", flat);
  return flat;
}

FlatConfig load_flat_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const std::string trimmed = trim(text);
  const bool looks_json = path.size() > 5 && path.substr(path.size() - 5) == ".json";
  if (looks_json || (!trimmed.empty() && trimmed.front() == '{'))
    return parse_config_json(text);
  return parse_config_text(text);
}

namespace {

template <typename T>
const T* find_as(const FlatConfig& flat, const std::string& key) {
  const auto it = flat.find(key);
  if (it == flat.end()) return nullptr;
  const T* v = std::get_if<T>(&it->second);
  if (!v) throw ValidationError("config: wrong type for key " + key);
  return v;
}

double get_number(const FlatConfig& flat, const std::string& key, double fallback) {
  const double* v = find_as<double>(flat, key);
  return v ? *v : fallback;
}

int get_int(const FlatConfig& flat, const std::string& key, int fallback) {
  return static_cast<int>(get_number(flat, key, fallback));
}

std::string get_string(const FlatConfig& flat, const std::string& key,
                       const std::string& fallback) {
  const std::string* v = find_as<std::string>(flat, key);
  return v ? *v : fallback;
}

bool get_bool(const FlatConfig& flat, const std::string& key, bool fallback) {
  const bool* v = find_as<bool>(flat, key);
  return v ? *v : fallback;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (experiment_name.empty()) throw ValidationError("ExperimentConfig: empty experiment name");
  if (seeds.empty()) throw ValidationError("ExperimentConfig: seeds must be nonempty");
  for (std::size_t i = 0; i < seeds.size(); ++i)
    for (std::size_t j = i + 1; j < seeds.size(); ++j)
      if (seeds[i] == seeds[j]) throw ValidationError("ExperimentConfig: duplicate seed");
  if (output_dir.empty()) throw ValidationError("ExperimentConfig: empty output dir");
  if (modes.empty()) throw ValidationError("ExperimentConfig: no modes selected");
  for (const auto& m : modes)
    if (m != "MD" && m != "Baseline")
      throw ValidationError("ExperimentConfig: unknown mode " + m);
  for (const auto& axis : sweep) {
    if (axis.values.empty())
      throw ValidationError("ExperimentConfig: sweep axis without values: " + axis.key);
    ExperimentConfig probe = *this;
    probe.sweep.clear();
    apply_override(probe, axis.key, axis.values.front());  // throws on unknown keys
  }
  agent.validate();
  build_env(env);  // throws on invalid environment parameters
}

ExperimentConfig experiment_from_flat(const FlatConfig& flat) {
  ExperimentConfig cfg;
  cfg.experiment_name = get_string(flat, "experiment_name", cfg.experiment_name);
  cfg.output_dir = get_string(flat, "output_dir", cfg.output_dir);
  if (const auto* seeds = find_as<std::vector<double>>(flat, "seeds")) {
    cfg.seeds.clear();
    for (double s : *seeds) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (const auto* modes = find_as<std::vector<std::string>>(flat, "modes")) cfg.modes = *modes;

  cfg.env.kind = get_string(flat, "env.kind", cfg.env.kind);
  cfg.env.island.epsilon = get_number(flat, "env.epsilon", cfg.env.island.epsilon);
  cfg.env.island.size_a = get_int(flat, "env.size_a", cfg.env.island.size_a);
  cfg.env.island.size_b = get_int(flat, "env.size_b", cfg.env.island.size_b);
  cfg.env.bottleneck_width = get_int(flat, "env.width", cfg.env.bottleneck_width);
  cfg.env.bottleneck_height = get_int(flat, "env.height", cfg.env.bottleneck_height);
  cfg.env.bottleneck_corridor = get_int(flat, "env.corridor_width", cfg.env.bottleneck_corridor);
  cfg.env.three_ring.grid_resolution =
      get_int(flat, "env.grid_resolution", cfg.env.three_ring.grid_resolution);
  cfg.env.three_ring.drift_strength =
      get_number(flat, "env.drift_strength", cfg.env.three_ring.drift_strength);
  if (const auto* radii = find_as<std::vector<double>>(flat, "env.ring_radii")) {
    if (radii->size() != 3) throw ValidationError("config: env.ring_radii needs 3 values");
    for (int i = 0; i < 3; ++i) cfg.env.three_ring.ring_radii[i] = (*radii)[i];
  }
  if (const auto* rewards = find_as<std::vector<double>>(flat, "env.ring_rewards")) {
    if (rewards->size() != 3) throw ValidationError("config: env.ring_rewards needs 3 values");
    for (int i = 0; i < 3; ++i) cfg.env.three_ring.ring_rewards[i] = (*rewards)[i];
  }
  cfg.env.goal_ring = get_int(flat, "env.goal_ring", cfg.env.goal_ring);
  cfg.env.custom_path = get_string(flat, "env.custom_path", cfg.env.custom_path);

  AgentConfig& a = cfg.agent;
  a.imagination_horizon = get_int(flat, "agent.imagination_horizon", a.imagination_horizon);
  a.relay_horizon = get_int(flat, "agent.relay_horizon", a.relay_horizon);
  a.target_update_period = get_int(flat, "agent.target_update_period", a.target_update_period);
  a.target_update_fraction =
      get_number(flat, "agent.target_update_fraction", a.target_update_fraction);
  a.generator_update_ratio =
      get_int(flat, "agent.generator_update_ratio", a.generator_update_ratio);
  a.episodes = get_int(flat, "agent.episodes", a.episodes);
  a.episode_length = get_int(flat, "agent.episode_length", a.episode_length);
  a.epsilon_greedy = get_number(flat, "agent.epsilon_greedy", a.epsilon_greedy);
  a.q_step = get_number(flat, "agent.q_step", a.q_step);
  a.epistemic_bonus = get_number(flat, "agent.epistemic_bonus", a.epistemic_bonus);
  a.plans_per_step = get_int(flat, "agent.plans_per_step", a.plans_per_step);
  a.pseudocount = get_number(flat, "agent.pseudocount", a.pseudocount);
  a.her_step = get_number(flat, "agent.her_step", a.her_step);
  a.eta = get_number(flat, "agent.eta", a.eta);
  a.beta = get_number(flat, "agent.beta", a.beta);
  a.lambda_mf = get_number(flat, "agent.lambda_mf", a.lambda_mf);
  a.margin = get_number(flat, "agent.margin", a.margin);
  a.temperature = get_number(flat, "agent.temperature", a.temperature);
  a.generator_step = get_number(flat, "agent.generator_step", a.generator_step);
  a.negatives_per_update = get_int(flat, "agent.negatives_per_update", a.negatives_per_update);
  a.elite_size = get_int(flat, "agent.elite_size", a.elite_size);
  a.buffer_sampled_source = get_bool(flat, "agent.buffer_sampled_source", a.buffer_sampled_source);

  for (const auto& [key, value] : flat) {
    if (key.rfind("sweep.", 0) != 0) continue;
    SweepAxis axis;
    axis.key = key.substr(6);
    if (const auto* nums = std::get_if<std::vector<double>>(&value)) {
      axis.values = *nums;
    } else if (const auto* num = std::get_if<double>(&value)) {
      axis.values = {*num};
    } else {
      throw ValidationError("config: sweep values must be numeric: " + key);
    }
    cfg.sweep.push_back(std::move(axis));
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  ExperimentConfig cfg = experiment_from_flat(load_flat_config(path));
  cfg.validate();
  return cfg;
}

void apply_override(ExperimentConfig& config, const std::string& key, double value) {
  if (key == "env.epsilon") {
    config.env.island.epsilon = value;
  } else if (key == "env.size_a") {
    config.env.island.size_a = static_cast<int>(value);
  } else if (key == "env.size_b") {
    config.env.island.size_b = static_cast<int>(value);
  } else if (key == "env.corridor_width") {
    config.env.bottleneck_corridor = static_cast<int>(value);
  } else if (key == "env.width") {
    config.env.bottleneck_width = static_cast<int>(value);
  } else if (key == "env.height") {
    config.env.bottleneck_height = static_cast<int>(value);
  } else if (key == "env.drift_strength") {
    config.env.three_ring.drift_strength = value;
  } else if (key == "env.grid_resolution") {
    config.env.three_ring.grid_resolution = static_cast<int>(value);
  } else if (key == "agent.epistemic_bonus") {
    config.agent.epistemic_bonus = value;
  } else if (key == "agent.imagination_horizon") {
    config.agent.imagination_horizon = static_cast<int>(value);
  } else if (key == "agent.generator_update_ratio") {
    config.agent.generator_update_ratio = static_cast<int>(value);
  } else if (key == "agent.lambda_mf") {
    config.agent.lambda_mf = value;
  } else if (key == "agent.episodes") {
    config.agent.episodes = static_cast<int>(value);
  } else {
    throw ValidationError("config: unknown sweep key " + key);
  }
}

BuiltEnv build_env(const EnvConfig& env) {
  BuiltEnv built;
  if (env.kind == "island") {
    IslandEnv island = build_island_mdp(env.island);
    built.goal_region = island.goal_region();
    built.start_state = 0;
    built.mdp = std::move(island.mdp);
  } else if (env.kind == "bottleneck") {
    BottleneckGrid grid = build_bottleneck_grid(env.bottleneck_width, env.bottleneck_height,
                                                env.bottleneck_corridor);
    built.goal_region = grid.goal_region();
    built.start_state = grid.state_at(env.bottleneck_height / 2, 0);
    built.mdp = std::move(grid.mdp);
  } else if (env.kind == "three_ring") {
    ThreeRingEnv ring = build_three_ring(env.three_ring);
    if (env.goal_ring < 0 || env.goal_ring > 2)
      throw ValidationError("config: goal_ring must lie in [0,2]");
    built.goal_region = ring.goal_region(env.goal_ring);
    built.start_state = ring.start_state;
    built.mdp = std::move(ring.mdp);
  } else if (env.kind == "custom") {
    built = load_custom_mdp(env.custom_path);
  } else {
    throw ValidationError("config: unknown env kind " + env.kind);
  }
  return built;
}

BuiltEnv load_custom_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("custom env: cannot open " + path);
  nlohmann::json doc;
  in >> doc;
  BuiltEnv built;
  const int n = doc.at("n_states").get<int>();
  const int na = doc.at("n_actions").get<int>();
  built.mdp = TabularMdp::zeros(n, na, doc.at("gamma").get<double>());
  const auto& transition = doc.at("transition");
  const auto& reward = doc.at("reward");
  if (transition.size() != static_cast<std::size_t>(n) * na * n)
    throw ValidationError("custom env: transition tensor size mismatch");
  if (reward.size() != static_cast<std::size_t>(n) * na)
    throw ValidationError("custom env: reward table size mismatch");
  for (std::size_t i = 0; i < built.mdp.transition.size(); ++i)
    built.mdp.transition[i] = transition[i].get<double>();
  for (std::size_t i = 0; i < built.mdp.reward.size(); ++i)
    built.mdp.reward[i] = reward[i].get<double>();
  built.mdp.validate();
  built.goal_region.assign(static_cast<std::size_t>(n), 0);
  if (doc.contains("goal"))
    for (const auto& g : doc.at("goal"))
      built.goal_region[g.get<std::size_t>()] = 1;
  built.start_state = doc.value("start", 0);
  return built;
}

}  // namespace md
