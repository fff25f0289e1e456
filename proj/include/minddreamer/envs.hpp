#pragma once

#include <array>
#include <vector>

#include "minddreamer/mdp.hpp"

namespace md {

// Two-cluster chain with an epsilon bridge: a mastered region A (reward 0),
// an out-of-distribution region B (reward 1), and a single bridging action
// from one A state that crosses with probability epsilon.
struct IslandSpec {
  double epsilon = 0.1;
  int size_a = 10;
  int size_b = 5;
  void validate() const;
};

struct IslandEnv {
  TabularMdp mdp;
  IslandSpec spec;
  int bridge_state = 0;   // the A state that can cross
  int bridge_action = 1;  // action index attempting the crossing
  int entry_state = 0;    // first B state, also the B->A return gate
  std::vector<int> region_a;
  std::vector<int> region_b;

  bool in_b(int s) const { return s >= spec.size_a; }
  std::vector<char> goal_region() const;  // indicator over states: region B
};

IslandEnv build_island_mdp(const IslandSpec& spec);

// Two width x height rooms joined through a wall by a corridor of the given
// width; 4-neighbor moves, blocked moves stay in place. Wall cells are not states.
struct BottleneckGrid {
  TabularMdp mdp;
  int width = 0;
  int height = 0;
  int corridor_width = 0;
  int total_cols = 0;
  std::vector<int> cell_to_state;  // -1 for wall cells, row-major (row * total_cols + col)
  std::vector<int> state_to_cell;
  int goal_state = 0;  // middle of the far room's outer column
  double step_reward = 0.0;
  double goal_reward = 1.0;

  int state_at(int row, int col) const { return cell_to_state[row * total_cols + col]; }
  int row_of(int s) const { return state_to_cell[s] / total_cols; }
  int col_of(int s) const { return state_to_cell[s] % total_cols; }
  std::vector<int> left_room() const;   // states with col < width
  std::vector<int> right_room() const;  // states with col > width
  std::vector<char> goal_region() const;
};

BottleneckGrid build_bottleneck_grid(int width, int height, int corridor_width,
                                     double step_reward = 0.0, double goal_reward = 1.0);

// Discretized three-ring field: a 2D grid over [-1,1]^2, 8-neighbor moves plus
// stay, and a stochastic radial drift that pulls toward the nearest ring radius.
// Reward is ring_rewards[i] inside a one-cell band around radius i.
struct ThreeRingSpec {
  int grid_resolution = 24;
  std::array<double, 3> ring_radii = {0.25, 0.55, 0.85};
  double drift_strength = 1.0;
  std::array<double, 3> ring_rewards = {1.0, 2.0, 3.0};
  void validate() const;
};

struct ThreeRingEnv {
  TabularMdp mdp;
  ThreeRingSpec spec;
  int resolution = 0;
  std::vector<int> ring_of_state;  // -1 outside every band, else ring index 0..2
  int start_state = 0;             // a cell on the inner ring band

  double cell_size() const { return 2.0 / resolution; }
  double x_of(int s) const { return -1.0 + (2.0 * (s % resolution) + 1.0) / resolution; }
  double y_of(int s) const { return -1.0 + (2.0 * (s / resolution) + 1.0) / resolution; }
  double radius_of(int s) const;
  std::vector<int> ring_band(int ring) const;
  // Indicator of the band around ring `ring` (0-based).
  std::vector<char> goal_region(int ring) const;
};

ThreeRingEnv build_three_ring(const ThreeRingSpec& spec);

}  // namespace md
