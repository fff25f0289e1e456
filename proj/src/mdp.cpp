#include "minddreamer/mdp.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

#include "minddreamer/errors.hpp"

namespace md {

namespace {
constexpr double kRowTol = 1e-12;
}

TabularMdp TabularMdp::zeros(int n_states, int n_actions, double gamma) {
  TabularMdp mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.gamma = gamma;
  mdp.transition.assign(
      static_cast<std::size_t>(n_states) * n_actions * n_states, 0.0);
  mdp.reward.assign(static_cast<std::size_t>(n_states) * n_actions, 0.0);
  return mdp;
}

void TabularMdp::validate() const {
  if (n_states <= 0 || n_actions <= 0)
    throw ValidationError("TabularMdp: state and action counts must be positive");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw ValidationError("TabularMdp: gamma must lie in (0,1)");
  if (transition.size() != static_cast<std::size_t>(n_states) * n_actions * n_states)
    throw ValidationError("TabularMdp: transition tensor has wrong size");
  if (reward.size() != static_cast<std::size_t>(n_states) * n_actions)
    throw ValidationError("TabularMdp: reward table has wrong size");
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) {
        const double v = p(s, a, s2);
        if (v < 0.0) throw ValidationError("TabularMdp: negative transition probability");
        sum += v;
      }
      if (std::abs(sum - 1.0) > kRowTol)
        throw ValidationError("TabularMdp: transition row does not sum to 1");
      if (!std::isfinite(r(s, a)))
        throw ValidationError("TabularMdp: non-finite reward entry");
    }
  }
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(n_states))
    throw ValidationError("TabularMdp: label count does not match state count");
}

bool TabularMdp::is_deterministic() const {
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a)
      for (int s2 = 0; s2 < n_states; ++s2) {
        const double v = p(s, a, s2);
        if (v != 0.0 && std::abs(v - 1.0) > kRowTol) return false;
      }
  return true;
}

int TabularMdp::successor(int s, int a) const {
  int best = 0;
  double best_p = -1.0;
  for (int s2 = 0; s2 < n_states; ++s2) {
    const double v = p(s, a, s2);
    if (v > best_p) {
      best_p = v;
      best = s2;
    }
  }
  return best;
}

void PolicyMatrix::validate() const {
  if (probs.size() != static_cast<std::size_t>(n_states) * n_actions)
    throw ValidationError("PolicyMatrix: wrong size");
  for (int s = 0; s < n_states; ++s) {
    double sum = 0.0;
    for (int a = 0; a < n_actions; ++a) {
      const double v = at(s, a);
      if (v < 0.0) throw ValidationError("PolicyMatrix: negative probability");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowTol)
      throw ValidationError("PolicyMatrix: row does not sum to 1");
  }
}

PolicyMatrix uniform_policy(const TabularMdp& mdp) {
  PolicyMatrix pi;
  pi.n_states = mdp.n_states;
  pi.n_actions = mdp.n_actions;
  pi.probs.assign(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions,
                  1.0 / mdp.n_actions);
  return pi;
}

PolicyMatrix greedy_policy(const TabularMdp& mdp, const std::vector<double>& values) {
  PolicyMatrix pi;
  pi.n_states = mdp.n_states;
  pi.n_actions = mdp.n_actions;
  pi.probs.assign(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions, 0.0);
  for (int s = 0; s < mdp.n_states; ++s) {
    int best = 0;
    double best_q = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < mdp.n_actions; ++a) {
      double q = mdp.r(s, a);
      for (int s2 = 0; s2 < mdp.n_states; ++s2) q += mdp.gamma * mdp.p(s, a, s2) * values[s2];
      if (q > best_q) {
        best_q = q;
        best = a;
      }
    }
    pi.at(s, best) = 1.0;
  }
  return pi;
}

void Trajectory::validate() const {
  if (states.size() != actions.size() + 1 || rewards.size() != actions.size())
    throw ValidationError("Trajectory: |states| must equal |actions|+1 and |rewards|+1");
}

void Buffer::add(const Transition& t) {
  transitions.push_back(t);
  visit_counts[static_cast<std::size_t>(t.state)] += 1;
  visit_counts[static_cast<std::size_t>(t.next_state)] += 1;
}

void Buffer::add_trajectory(const Trajectory& trajectory) {
  for (std::size_t i = 0; i < trajectory.steps(); ++i)
    add({trajectory.states[i], trajectory.actions[i], trajectory.rewards[i],
         trajectory.states[i + 1]});
}

std::vector<double> Buffer::occupancy() const {
  std::vector<double> rho(visit_counts.size(), 0.0);
  long total = 0;
  for (long c : visit_counts) total += c;
  if (total == 0) return rho;
  for (std::size_t s = 0; s < rho.size(); ++s)
    rho[s] = static_cast<double>(visit_counts[s]) / static_cast<double>(total);
  return rho;
}

std::vector<char> Buffer::support() const {
  std::vector<char> seen(visit_counts.size(), 0);
  for (std::size_t s = 0; s < seen.size(); ++s) seen[s] = visit_counts[s] > 0 ? 1 : 0;
  return seen;
}

Trajectory rollout(const TabularMdp& mdp, const PolicyMatrix& policy, int start, int horizon,
                   Rng& rng) {
  if (start < 0 || start >= mdp.n_states) throw ValidationError("rollout: invalid start state");
  if (horizon < 0) throw ValidationError("rollout: horizon must be non-negative");
  Trajectory out;
  out.states.reserve(static_cast<std::size_t>(horizon) + 1);
  out.actions.reserve(static_cast<std::size_t>(horizon));
  out.rewards.reserve(static_cast<std::size_t>(horizon));
  int s = start;
  out.states.push_back(s);
  for (int t = 0; t < horizon; ++t) {
    const int a = static_cast<int>(rng.sample(policy.row(s)));
    const int s2 = static_cast<int>(rng.sample(mdp.row(s, a)));
    out.actions.push_back(a);
    out.rewards.push_back(mdp.r(s, a));
    out.states.push_back(s2);
    s = s2;
  }
  return out;
}

}  // namespace md
