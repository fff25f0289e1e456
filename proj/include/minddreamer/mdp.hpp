#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "minddreamer/rng.hpp"

namespace md {

// Finite MDP with dense transition tensor P(s'|s,a) and reward table r(s,a).
// Immutable after construction in practice; all solvers take it by const ref.
struct TabularMdp {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> transition;  // [s * A * n + a * n + s2]
  std::vector<double> reward;      // [s * A + a]
  double gamma = 0.95;
  std::vector<std::string> labels;  // optional, empty or size n_states

  double p(int s, int a, int s2) const {
    return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }
  double& p(int s, int a, int s2) {
    return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }
  std::span<const double> row(int s, int a) const {
    return {transition.data() + (static_cast<std::size_t>(s) * n_actions + a) * n_states,
            static_cast<std::size_t>(n_states)};
  }
  double r(int s, int a) const { return reward[static_cast<std::size_t>(s) * n_actions + a]; }
  double& r(int s, int a) { return reward[static_cast<std::size_t>(s) * n_actions + a]; }

  static TabularMdp zeros(int n_states, int n_actions, double gamma);

  // Checks row stochasticity (1e-12), gamma in (0,1) and finite rewards; throws ValidationError.
  void validate() const;

  // True when every (s,a) row is a point mass.
  bool is_deterministic() const;

  // Successor of (s,a) for deterministic rows; the argmax entry otherwise.
  int successor(int s, int a) const;
};

// Row-stochastic policy matrix pi(a|s), stored [s * A + a].
struct PolicyMatrix {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> probs;

  double at(int s, int a) const { return probs[static_cast<std::size_t>(s) * n_actions + a]; }
  double& at(int s, int a) { return probs[static_cast<std::size_t>(s) * n_actions + a]; }
  std::span<const double> row(int s) const {
    return {probs.data() + static_cast<std::size_t>(s) * n_actions,
            static_cast<std::size_t>(n_actions)};
  }
  void validate() const;
};

PolicyMatrix uniform_policy(const TabularMdp& mdp);
// Deterministic policy that picks argmax_a [r(s,a) + gamma * sum P V].
PolicyMatrix greedy_policy(const TabularMdp& mdp, const std::vector<double>& values);

struct Trajectory {
  std::vector<int> states;   // length = steps + 1
  std::vector<int> actions;  // length = steps
  std::vector<double> rewards;

  std::size_t steps() const { return actions.size(); }
  void validate() const;
};

struct Transition {
  int state;
  int action;
  double reward;
  int next_state;
};

// Replay buffer of observed transitions plus per-state visit counts.
struct Buffer {
  std::vector<Transition> transitions;
  std::vector<long> visit_counts;  // indexed by state; counts both ends of each transition

  explicit Buffer(int n_states = 0) : visit_counts(static_cast<std::size_t>(n_states), 0) {}

  void add(const Transition& t);
  void add_trajectory(const Trajectory& trajectory);
  bool empty() const { return transitions.empty(); }

  // Normalized visit counts; the empirical occupancy rho(s).
  std::vector<double> occupancy() const;
  // States with at least one visit.
  std::vector<char> support() const;
};

// Samples exactly `horizon` transitions; pure function of (mdp, policy, start, horizon, rng key).
Trajectory rollout(const TabularMdp& mdp, const PolicyMatrix& policy, int start, int horizon,
                   Rng& rng);

}  // namespace md
