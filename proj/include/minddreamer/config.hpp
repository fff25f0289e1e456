#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "minddreamer/agent.hpp"
#include "minddreamer/envs.hpp"

namespace md {

// Flat configuration map with dotted keys ("env.epsilon"), parsed either from
// the key/value text format with [section] tables or from JSON.
using ConfigValue =
    std::variant<double, bool, std::string, std::vector<double>, std::vector<std::string>>;
using FlatConfig = std::map<std::string, ConfigValue>;

FlatConfig parse_config_text(const std::string& text);
FlatConfig parse_config_json(const std::string& text);
FlatConfig load_flat_config(const std::string& path);  // dispatches on content/extension

struct EnvConfig {
  std::string kind = "island";  // island | bottleneck | three_ring | custom
  IslandSpec island;
  int bottleneck_width = 8;
  int bottleneck_height = 8;
  int bottleneck_corridor = 2;
  ThreeRingSpec three_ring;
  int goal_ring = 1;  // three-ring goal band index
  std::string custom_path;
};

struct SweepAxis {
  std::string key;
  std::vector<double> values;
};

struct ExperimentConfig {
  std::string experiment_name = "experiment";
  EnvConfig env;
  AgentConfig agent;
  std::vector<SweepAxis> sweep;
  std::vector<std::uint64_t> seeds = {1};
  std::string output_dir = "out";
  std::vector<std::string> modes = {"MD", "Baseline"};

  void validate() const;
};

ExperimentConfig experiment_from_flat(const FlatConfig& flat);
ExperimentConfig load_experiment_config(const std::string& path);

// Applies one sweep override ("env.epsilon" = 0.05); unknown keys throw.
void apply_override(ExperimentConfig& config, const std::string& key, double value);

// Environment instantiated from the config: the MDP plus goal set and start.
struct BuiltEnv {
  TabularMdp mdp;
  std::vector<char> goal_region;
  int start_state = 0;
};

BuiltEnv build_env(const EnvConfig& env);

// Custom matrix file: JSON with n_states, n_actions, gamma, transition, reward,
// optional goal list and start.
BuiltEnv load_custom_mdp(const std::string& path);

}  // namespace md
