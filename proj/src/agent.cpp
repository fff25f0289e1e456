#include "minddreamer/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "minddreamer/errors.hpp"

namespace md {

void AnchorGenerator::validate() const {
  if (logits.empty()) throw ValidationError("AnchorGenerator: empty state space");
  if (eta < 0.0 || beta < 0.0 || lambda_mf < 0.0 || margin < 0.0)
    throw ValidationError("AnchorGenerator: weights must be non-negative");
  if (!(temperature > 0.0) || !(step_size > 0.0))
    throw ValidationError("AnchorGenerator: temperature and step size must be positive");
  for (double v : logits)
    if (!std::isfinite(v)) throw ValidationError("AnchorGenerator: non-finite logit");
}

std::vector<double> AnchorGenerator::distribution() const {
  std::vector<double> p(logits.size());
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : logits) peak = std::max(peak, v / temperature);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] / temperature - peak);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

double AnchorGenerator::entropy() const {
  double h = 0.0;
  for (double v : distribution())
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

int sample_anchor(const AnchorGenerator& gen, Rng& rng) {
  const auto p = gen.distribution();
  return static_cast<int>(rng.sample(p));
}

WorldModelCounts WorldModelCounts::make(int n_states, int n_actions, double pseudocount) {
  if (!(pseudocount > 0.0))
    throw ValidationError("WorldModelCounts: pseudocount must be positive");
  WorldModelCounts wm;
  wm.n_states = n_states;
  wm.n_actions = n_actions;
  wm.pseudocount = pseudocount;
  wm.counts.assign(static_cast<std::size_t>(n_states) * n_actions * n_states, 0.0);
  return wm;
}

std::vector<double> WorldModelCounts::posterior_mean_row(int s, int a) const {
  std::vector<double> row(static_cast<std::size_t>(n_states));
  const std::size_t base = (static_cast<std::size_t>(s) * n_actions + a) * n_states;
  double total = 0.0;
  for (int s2 = 0; s2 < n_states; ++s2) total += counts[base + s2] + pseudocount;
  for (int s2 = 0; s2 < n_states; ++s2) row[static_cast<std::size_t>(s2)] =
      (counts[base + s2] + pseudocount) / total;
  return row;
}

namespace {
double row_kl(const std::vector<double>& p, const std::vector<double>& q) {
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) kl += p[i] * std::log(p[i] / q[i]);
  return std::max(kl, 0.0);
}
}  // namespace

double WorldModelCounts::observe(int s, int a, int s2) {
  const auto before = posterior_mean_row(s, a);
  counts[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2] += 1.0;
  const auto after = posterior_mean_row(s, a);
  return row_kl(after, before);
}

double WorldModelCounts::expected_update_kl(int s, int a) const {
  const auto row = posterior_mean_row(s, a);
  const std::size_t base = (static_cast<std::size_t>(s) * n_actions + a) * n_states;
  double total = 0.0;
  for (int t = 0; t < n_states; ++t) total += counts[base + t] + pseudocount;
  // After observing outcome o: row scales by total/(total+1) except entry o
  // which gains 1/(total+1). KL(after || before) has a closed two-term form.
  // Observing outcome o rescales every other entry by total/(total+1), so the
  // KL collapses to two terms.
  double expected = 0.0;
  const double shrink = total / (total + 1.0);
  for (int o = 0; o < n_states; ++o) {
    const double p_o = row[static_cast<std::size_t>(o)];
    const double p_o_after = (counts[base + o] + pseudocount + 1.0) / (total + 1.0);
    const double kl =
        (1.0 - p_o_after) * std::log(shrink) + p_o_after * std::log(p_o_after / p_o);
    expected += p_o * std::max(kl, 0.0);
  }
  return expected;
}

double WorldModelCounts::mean_row_entropy(int s) const {
  double acc = 0.0;
  for (int a = 0; a < n_actions; ++a) {
    const auto row = posterior_mean_row(s, a);
    double h = 0.0;
    for (double v : row)
      if (v > 0.0) h -= v * std::log(v);
    acc += h;
  }
  return acc / n_actions;
}

double psi_score(int anchor, const RelayTable& rvf, const RelayTable& ruf, int source,
                 double eta, double beta) {
  return eta * rvf.at(source, anchor) + beta * ruf.at(source, anchor);
}

double manifold_loss(int anchor, const WorldModelCounts& wm,
                     const std::vector<char>& reachable) {
  const double entropy = wm.mean_row_entropy(anchor);
  const double support_penalty = reachable[static_cast<std::size_t>(anchor)] ? 0.0 : 1.0;
  return entropy + support_penalty;
}

ContrastiveResult contrastive_update(const AnchorGenerator& gen, int positive,
                                     const std::vector<int>& negatives,
                                     const std::vector<double>& psi,
                                     const std::vector<double>& mf) {
  if (negatives.empty()) throw ValidationError("contrastive_update: negatives must be nonempty");
  ContrastiveResult out;
  out.generator = gen;

  const double psi_pos = psi[static_cast<std::size_t>(positive)];
  double max_neg = -std::numeric_limits<double>::infinity();
  for (int s : negatives) max_neg = std::max(max_neg, psi[static_cast<std::size_t>(s)]);

  const double hinge = std::max(0.0, gen.margin - (psi_pos - max_neg));
  const double mf_pos = mf[static_cast<std::size_t>(positive)];
  out.loss = hinge + gen.lambda_mf * mf_pos;
  out.hinge_active = hinge > 0.0;
  if (!out.hinge_active) return out;

  if (psi_pos > gen.lambda_mf * mf_pos)
    out.generator.logits[static_cast<std::size_t>(positive)] += gen.step_size;

  std::vector<int> violating;
  for (int s : negatives)
    if (psi[static_cast<std::size_t>(s)] > psi_pos - gen.margin) violating.push_back(s);
  if (!violating.empty()) {
    const double share = gen.step_size / static_cast<double>(violating.size());
    for (int s : violating) out.generator.logits[static_cast<std::size_t>(s)] -= share;
  }
  return out;
}

void relay_her_update(RelayTable& rvf, RelayTable& ruf, const Trajectory& trajectory,
                      const std::vector<double>& v_target, const std::vector<double>& u_target,
                      int k, const InfoField& info, double gamma, double step_size) {
  if (k < 1) throw ValidationError("relay_her_update: k must be >= 1");
  const auto steps = static_cast<int>(trajectory.steps());
  const double gamma2 = gamma * gamma;
  for (int i = 0; i < steps; ++i) {
    const int source = trajectory.states[static_cast<std::size_t>(i)];
    double reward_sum = 0.0;
    double shock_sum = 0.0;
    double disc = 1.0;
    double disc2 = 1.0;
    for (int j = i + 1; j <= std::min(i + k, steps); ++j) {
      const int t = j - 1;  // transition feeding step j
      reward_sum += disc * trajectory.rewards[static_cast<std::size_t>(t)];
      shock_sum += disc2 * info.at(trajectory.states[static_cast<std::size_t>(t)],
                                   trajectory.actions[static_cast<std::size_t>(t)]);
      disc *= gamma;
      disc2 *= gamma2;
      const int anchor = trajectory.states[static_cast<std::size_t>(j)];
      if (anchor == source) continue;  // the diagonal keeps the bootstrap convention
      const double pragmatic_target =
          reward_sum + disc * v_target[static_cast<std::size_t>(anchor)];
      const double epistemic_target =
          shock_sum + disc2 * u_target[static_cast<std::size_t>(anchor)];
      double& rv = rvf.at(source, anchor);
      if (pragmatic_target > rv) rv += step_size * (pragmatic_target - rv);
      double& ru = ruf.at(source, anchor);
      ru += step_size * (epistemic_target - ru);
    }
  }
}

void targets_soft_update(std::vector<double>& targets, const std::vector<double>& live,
                         double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ValidationError("targets_soft_update: fraction must lie in (0,1]");
  for (std::size_t i = 0; i < targets.size(); ++i)
    targets[i] = (1.0 - fraction) * targets[i] + fraction * live[i];
}

void targets_soft_update(RelayTable& targets, const RelayTable& live, double fraction) {
  targets_soft_update(targets.entries, live.entries, fraction);
}

std::string to_string(TrainMode mode) {
  return mode == TrainMode::MindDreamer ? "MD" : "Baseline";
}

void AgentConfig::validate() const {
  if (imagination_horizon < 0) throw ValidationError("AgentConfig: H must be >= 0");
  if (relay_horizon < 1) throw ValidationError("AgentConfig: relay horizon must be >= 1");
  if (target_update_period < 1) throw ValidationError("AgentConfig: target period must be >= 1");
  if (!(target_update_fraction > 0.0 && target_update_fraction <= 1.0))
    throw ValidationError("AgentConfig: target fraction must lie in (0,1]");
  if (generator_update_ratio < 1)
    throw ValidationError("AgentConfig: generator ratio must be >= 1");
  if (episodes < 1 || episode_length < 1)
    throw ValidationError("AgentConfig: episodes and episode length must be >= 1");
  if (!(epsilon_greedy >= 0.0 && epsilon_greedy <= 1.0))
    throw ValidationError("AgentConfig: epsilon must lie in [0,1]");
  if (!(q_step > 0.0 && q_step <= 1.0))
    throw ValidationError("AgentConfig: q step must lie in (0,1]");
  if (plans_per_step < 0) throw ValidationError("AgentConfig: plans per step must be >= 0");
  if (!(pseudocount > 0.0)) throw ValidationError("AgentConfig: pseudocount must be positive");
  if (negatives_per_update < 1 || elite_size < 1)
    throw ValidationError("AgentConfig: negative pool and elite sizes must be >= 1");
}

namespace {

struct QTable {
  int n = 0;
  int a = 0;
  std::vector<double> q;

  QTable(int n_states, int n_actions)
      : n(n_states), a(n_actions),
        q(static_cast<std::size_t>(n_states) * n_actions, 0.0) {}
  double& at(int s, int act) { return q[static_cast<std::size_t>(s) * a + act]; }
  double at(int s, int act) const { return q[static_cast<std::size_t>(s) * a + act]; }
  int argmax(int s) const {
    int best = 0;
    double best_v = at(s, 0);
    for (int act = 1; act < a; ++act)
      if (at(s, act) > best_v) {
        best_v = at(s, act);
        best = act;
      }
    return best;
  }
  double max(int s) const { return at(s, argmax(s)); }
};

int eps_greedy(const QTable& q, int s, double epsilon, Rng& rng) {
  if (rng.next_double() < epsilon) return static_cast<int>(rng.next_index(static_cast<std::size_t>(q.a)));
  return q.argmax(s);
}

}  // namespace

RunResult train(const TabularMdp& env, const std::vector<char>& goal_region, int start_state,
                TrainMode mode, const AgentConfig& config, Rng rng) {
  config.validate();
  env.validate();
  if (goal_region.size() != static_cast<std::size_t>(env.n_states))
    throw ValidationError("train: goal indicator size mismatch");
  if (start_state < 0 || start_state >= env.n_states)
    throw ValidationError("train: invalid start state");

  const int n = env.n_states;
  const int na = env.n_actions;
  const double gamma = env.gamma;
  const bool dreaming = mode == TrainMode::MindDreamer;

  Rng act_rng = rng.stream(1);
  Rng env_rng = rng.stream(2);
  Rng plan_rng = rng.stream(3);
  Rng gen_rng = rng.stream(4);

  QTable q(n, na);
  QTable q_u(n, na);
  WorldModelCounts wm = WorldModelCounts::make(n, na, config.pseudocount);
  InfoField info = InfoField::zeros(n, na);
  {
    const double prior_shock = wm.expected_update_kl(0, 0);  // symmetric prior: same everywhere
    for (double& v : info.shocks) v = prior_shock;
  }
  std::vector<double> reward_sum(static_cast<std::size_t>(n) * na, 0.0);
  std::vector<long> reward_cnt(reward_sum.size(), 0);
  auto model_reward = [&](int s, int a) {
    const std::size_t i = static_cast<std::size_t>(s) * na + a;
    return reward_cnt[i] > 0 ? reward_sum[i] / static_cast<double>(reward_cnt[i]) : 0.0;
  };

  Buffer buffer(n);
  std::vector<char> reachable(static_cast<std::size_t>(n), 0);
  std::vector<int> visited_list;
  auto mark_reachable = [&](int s) {
    if (!reachable[static_cast<std::size_t>(s)]) {
      reachable[static_cast<std::size_t>(s)] = 1;
      visited_list.push_back(s);
    }
  };
  mark_reachable(start_state);

  RelayTable live_rvf = RelayTable::zeros(n, RelayTable::Kind::pragmatic);
  RelayTable live_ruf = RelayTable::zeros(n, RelayTable::Kind::epistemic);
  RelayTable target_rvf = live_rvf;
  RelayTable target_ruf = live_ruf;
  std::vector<double> target_v(static_cast<std::size_t>(n), 0.0);
  std::vector<double> target_u(static_cast<std::size_t>(n), 0.0);

  AnchorGenerator gen;
  gen.logits.assign(static_cast<std::size_t>(n), 0.0);
  gen.eta = config.eta;
  gen.beta = config.beta;
  gen.lambda_mf = config.lambda_mf;
  gen.margin = config.margin;
  gen.temperature = config.temperature;
  gen.step_size = config.generator_step;

  std::vector<int> elite;
  std::vector<double> psi_cache(static_cast<std::size_t>(n), 0.0);
  std::vector<double> mf_cache(static_cast<std::size_t>(n), 0.0);
  std::vector<double> psi_probe_prev;
  double psi_change_acc = 0.0;
  long psi_change_count = 0;

  RunResult result;
  result.mode = to_string(mode);
  result.budget_steps = static_cast<long>(config.episodes) * config.episode_length;

  auto imagination_start = [&](Rng& r) {
    if (dreaming) return sample_anchor(gen, r);
    return visited_list[r.next_index(visited_list.size())];
  };

  auto td_update = [&](int s, int a, double reward, int s2) {
    const double bonus = config.epistemic_bonus * info.at(s, a);
    q.at(s, a) += config.q_step * (reward + bonus + gamma * q.max(s2) - q.at(s, a));
    const int pragmatic_next = q.argmax(s2);
    q_u.at(s, a) += config.q_step *
                    (info.at(s, a) + gamma * gamma * q_u.at(s2, pragmatic_next) - q_u.at(s, a));
  };

  auto generator_round = [&](int source) {
    const int candidate = sample_anchor(gen, gen_rng);
    std::vector<int> pool;
    pool.push_back(candidate);
    for (int i = 0; i < config.negatives_per_update; ++i)
      pool.push_back(visited_list[gen_rng.next_index(visited_list.size())]);
    for (int s : elite) pool.push_back(s);

    double best_score = -std::numeric_limits<double>::infinity();
    int positive = candidate;
    for (int s : pool) {
      psi_cache[static_cast<std::size_t>(s)] =
          psi_score(s, target_rvf, target_ruf, source, gen.eta, gen.beta);
      mf_cache[static_cast<std::size_t>(s)] = manifold_loss(s, wm, reachable);
      const double net = psi_cache[static_cast<std::size_t>(s)] -
                         gen.lambda_mf * mf_cache[static_cast<std::size_t>(s)];
      if (net > best_score) {
        best_score = net;
        positive = s;
      }
    }
    std::vector<int> negatives;
    bool positive_taken = false;
    for (int s : pool) {
      if (!positive_taken && s == positive) {
        positive_taken = true;
        continue;
      }
      negatives.push_back(s);
    }
    if (negatives.empty()) negatives.push_back(candidate);

    auto updated = contrastive_update(gen, positive, negatives, psi_cache, mf_cache);
    gen = std::move(updated.generator);

    // Elite pool: top states by net score, greedily maintained. Every elite is
    // in the pool, so the cached scores cover them.
    auto net_of = [&](int x) {
      return psi_cache[static_cast<std::size_t>(x)] -
             gen.lambda_mf * mf_cache[static_cast<std::size_t>(x)];
    };
    auto try_insert = [&](int s) {
      for (int e : elite)
        if (e == s) return;
      if (static_cast<int>(elite.size()) < config.elite_size) {
        elite.push_back(s);
        return;
      }
      int worst_idx = 0;
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < elite.size(); ++i) {
        const double score = net_of(elite[i]);
        if (score < worst) {
          worst = score;
          worst_idx = static_cast<int>(i);
        }
      }
      if (net_of(s) > worst) elite[static_cast<std::size_t>(worst_idx)] = s;
    };
    try_insert(positive);
    result.anchor_history.push_back(candidate);

    // Psi landscape drift between consecutive generator rounds, on a probe row.
    std::vector<double> probe(static_cast<std::size_t>(n));
    for (int s2 = 0; s2 < n; ++s2)
      probe[static_cast<std::size_t>(s2)] =
          psi_score(s2, target_rvf, target_ruf, start_state, gen.eta, gen.beta);
    if (!psi_probe_prev.empty()) {
      double diff = 0.0;
      for (int s2 = 0; s2 < n; ++s2)
        diff = std::max(diff, std::abs(probe[static_cast<std::size_t>(s2)] -
                                        psi_probe_prev[static_cast<std::size_t>(s2)]));
      psi_change_acc += diff;
      ++psi_change_count;
    }
    psi_probe_prev = std::move(probe);
  };

  long global_step = 0;
  for (int ep = 0; ep < config.episodes; ++ep) {
    int s = start_state;
    double ep_return = 0.0;
    Trajectory real_traj;
    real_traj.states.push_back(s);
    for (int t = 0; t < config.episode_length; ++t) {
      const int a = eps_greedy(q, s, config.epsilon_greedy, act_rng);
      const int s2 = static_cast<int>(env_rng.sample(env.row(s, a)));
      const double r = env.r(s, a);
      ep_return += r;

      const double shock = wm.observe(s, a, s2);
      info.at(s, a) = shock;
      reward_sum[static_cast<std::size_t>(s) * na + a] += r;
      reward_cnt[static_cast<std::size_t>(s) * na + a] += 1;
      buffer.add({s, a, r, s2});
      mark_reachable(s);
      mark_reachable(s2);
      if (goal_region[static_cast<std::size_t>(s2)] && result.first_hit_step < 0) {
        result.first_hit_step = global_step;
        result.hit_censored = false;
      }
      real_traj.actions.push_back(a);
      real_traj.rewards.push_back(r);
      real_traj.states.push_back(s2);

      td_update(s, a, r, s2);

      for (int p = 0; p < config.plans_per_step; ++p) {
        int cur = imagination_start(plan_rng);
        Trajectory imagined;
        imagined.states.push_back(cur);
        for (int h = 0; h < config.imagination_horizon; ++h) {
          const int ia = eps_greedy(q, cur, config.epsilon_greedy, plan_rng);
          const auto row = wm.posterior_mean_row(cur, ia);
          const int nxt = static_cast<int>(plan_rng.sample(row));
          const double ir = model_reward(cur, ia);
          td_update(cur, ia, ir, nxt);
          imagined.actions.push_back(ia);
          imagined.rewards.push_back(ir);
          imagined.states.push_back(nxt);
          cur = nxt;
        }
        if (imagined.steps() > 0)
          relay_her_update(live_rvf, live_ruf, imagined, target_v, target_u,
                           config.relay_horizon, info, gamma, config.her_step);
      }

      if (dreaming) {
        const int source = config.buffer_sampled_source
                               ? visited_list[gen_rng.next_index(visited_list.size())]
                               : s;
        for (int g = 0; g < config.generator_update_ratio; ++g) generator_round(source);
      }

      if ((global_step + 1) % config.target_update_period == 0) {
        std::vector<double> v_live(static_cast<std::size_t>(n));
        std::vector<double> u_live(static_cast<std::size_t>(n));
        for (int x = 0; x < n; ++x) {
          const int greedy = q.argmax(x);
          v_live[static_cast<std::size_t>(x)] = q.at(x, greedy);
          u_live[static_cast<std::size_t>(x)] = q_u.at(x, greedy);
        }
        targets_soft_update(target_v, v_live, config.target_update_fraction);
        targets_soft_update(target_u, u_live, config.target_update_fraction);
        targets_soft_update(target_rvf, live_rvf, config.target_update_fraction);
        targets_soft_update(target_ruf, live_ruf, config.target_update_fraction);
      }

      ++global_step;
      s = s2;
    }
    relay_her_update(live_rvf, live_ruf, real_traj, target_v, target_u, config.relay_horizon,
                     info, gamma, config.her_step);

    result.return_curve.push_back(ep_return);
    const auto p_gen = gen.distribution();
    double unreachable_mass = 0.0;
    for (int x = 0; x < n; ++x)
      if (!reachable[static_cast<std::size_t>(x)])
        unreachable_mass += p_gen[static_cast<std::size_t>(x)];
    double mean_shock = 0.0;
    for (double v : info.shocks) mean_shock += v;
    mean_shock /= static_cast<double>(info.shocks.size());
    result.metric_series["episode_return"].push_back(ep_return);
    result.metric_series["generator_entropy"].push_back(gen.entropy());
    result.metric_series["unreachable_mass"].push_back(unreachable_mass);
    result.metric_series["mean_shock"].push_back(mean_shock);
    result.metric_series["visited_states"].push_back(static_cast<double>(visited_list.size()));
    result.metric_series["psi_drift"].push_back(
        psi_change_count > 0 ? psi_change_acc / static_cast<double>(psi_change_count) : 0.0);
  }

  if (result.first_hit_step < 0) result.first_hit_step = result.budget_steps;
  return result;
}

}  // namespace md
