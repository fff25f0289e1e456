#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "minddreamer/mdp.hpp"
#include "minddreamer/potentials.hpp"
#include "minddreamer/rng.hpp"

namespace md {

// Categorical intervention distribution over states with contrastive weights.
struct AnchorGenerator {
  std::vector<double> logits;
  double eta = 1.0;         // pragmatic weight
  double beta = 1.0;        // epistemic weight
  double lambda_mf = 4.0;   // manifold weight
  double margin = 0.5;      // hinge margin
  double temperature = 0.5;
  double step_size = 0.25;

  void validate() const;
  std::vector<double> distribution() const;  // softmax(logits / temperature)
  double entropy() const;
};

int sample_anchor(const AnchorGenerator& gen, Rng& rng);

// Dirichlet transition posterior: counts plus a symmetric pseudocount prior.
struct WorldModelCounts {
  int n_states = 0;
  int n_actions = 0;
  double pseudocount = 0.05;
  std::vector<double> counts;  // [s * A * n + a * n + s2]

  static WorldModelCounts make(int n_states, int n_actions, double pseudocount);
  double count(int s, int a, int s2) const {
    return counts[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }
  std::vector<double> posterior_mean_row(int s, int a) const;
  // Records one transition; returns the predictive KL between the row after
  // and before the update — the local epistemic shock, which vanishes as
  // counts grow.
  double observe(int s, int a, int s2);
  // Expected shock of the next observation at (s, a) under the current row.
  double expected_update_kl(int s, int a) const;
  // Mean over actions of the posterior-mean transition entropy at `s`.
  double mean_row_entropy(int s) const;
};

// Psi(source, anchor) = eta * RVF + beta * RUF.
double psi_score(int anchor, const RelayTable& rvf, const RelayTable& ruf, int source,
                 double eta, double beta);

// Transition-entropy term plus an out-of-support indicator penalty.
double manifold_loss(int anchor, const WorldModelCounts& wm, const std::vector<char>& reachable);

struct ContrastiveResult {
  AnchorGenerator generator;
  double loss = 0.0;
  bool hinge_active = false;
};

// Hinge update: loss = max(0, margin - (psi(pos) - max_neg psi)) + lambda * mf(pos).
// When the hinge is active the positive logit gains step_size provided its psi
// exceeds the manifold cost, and step_size is spread as a penalty over the
// negatives inside the margin.
ContrastiveResult contrastive_update(const AnchorGenerator& gen, int positive,
                                     const std::vector<int>& negatives,
                                     const std::vector<double>& psi,
                                     const std::vector<double>& mf);

// k-horizon hindsight relabeling along a trajectory: every state at most k
// steps downstream becomes an anchor for its predecessors. Pragmatic targets
// discount with gamma and move entries up only (RVF is a max over paths);
// epistemic targets discount with gamma^2 and use a mean update. Bootstraps
// come from the quasi-static fields, never the live tables.
void relay_her_update(RelayTable& rvf, RelayTable& ruf, const Trajectory& trajectory,
                      const std::vector<double>& v_target, const std::vector<double>& u_target,
                      int k, const InfoField& info, double gamma, double step_size);

void targets_soft_update(std::vector<double>& targets, const std::vector<double>& live,
                         double fraction);
void targets_soft_update(RelayTable& targets, const RelayTable& live, double fraction);

enum class TrainMode { MindDreamer, Baseline };
std::string to_string(TrainMode mode);

struct AgentConfig {
  int imagination_horizon = 5;   // H; 0 disables imagination entirely
  int relay_horizon = 5;         // k
  int target_update_period = 20;
  double target_update_fraction = 0.5;
  int generator_update_ratio = 4;  // generator rounds per world-model update
  int episodes = 30;
  int episode_length = 60;
  std::uint64_t seed = 0;

  double epsilon_greedy = 0.15;
  double q_step = 0.5;
  double epistemic_bonus = 1.0;  // weight of the info shock in TD targets
  int plans_per_step = 4;
  double pseudocount = 0.05;
  double her_step = 1.0;

  double eta = 1.0;
  double beta = 1.0;
  double lambda_mf = 4.0;
  double margin = 0.5;
  double temperature = 0.5;
  double generator_step = 0.25;
  int negatives_per_update = 8;
  int elite_size = 32;
  bool buffer_sampled_source = false;  // source of Psi: current state vs buffer sample

  void validate() const;
};

struct RunResult {
  std::string mode;
  long first_hit_step = -1;  // global real step of the first goal visit
  bool hit_censored = true;
  long budget_steps = 0;
  std::vector<double> return_curve;            // one entry per episode
  std::vector<int> anchor_history;             // sampled anchors per generator update
  std::map<std::string, std::vector<double>> metric_series;  // per-episode series
};

// Dyna-style loop: world-model counts from real transitions, imagined rollouts
// on the posterior-mean model, and (in MindDreamer mode) generator-chosen
// imagination starts; Baseline draws starts uniformly from the buffer support.
RunResult train(const TabularMdp& env, const std::vector<char>& goal_region, int start_state,
                TrainMode mode, const AgentConfig& config, Rng rng);

}  // namespace md
