#include <doctest.h>

#include <cmath>

#include "minddreamer/envs.hpp"
#include "minddreamer/errors.hpp"
#include "minddreamer/potentials.hpp"
#include "minddreamer/topology.hpp"

using namespace md;

namespace {

// Stationary distribution by raw power iteration, independent of ChainView.
std::vector<double> stationary_oracle(const TabularMdp& mdp, const PolicyMatrix& pi) {
  const int n = mdp.n_states;
  std::vector<double> mu(static_cast<std::size_t>(n), 1.0 / n);
  std::vector<double> next(mu.size());
  for (int iter = 0; iter < 200000; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < n; ++s)
      for (int a = 0; a < mdp.n_actions; ++a)
        for (int s2 = 0; s2 < n; ++s2)
          next[static_cast<std::size_t>(s2)] +=
              mu[static_cast<std::size_t>(s)] * pi.at(s, a) * mdp.p(s, a, s2);
    double diff = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) diff += std::abs(next[i] - mu[i]);
    mu.swap(next);
    if (diff < 1e-13) break;
  }
  return mu;
}

}  // namespace

TEST_CASE("island: degenerate epsilon=1 single-state regions form a 2-state chain") {
  const IslandEnv env = build_island_mdp({1.0, 1, 1});
  CHECK(env.mdp.n_states == 2);
  CHECK(env.mdp.is_deterministic());
  CHECK(env.mdp.p(env.bridge_state, env.bridge_action, env.entry_state) == 1.0);
}

TEST_CASE("island: bridge crossing probability sits in the tensor exactly") {
  const IslandEnv env = build_island_mdp({0.1, 10, 5});
  CHECK(env.mdp.p(env.bridge_state, env.bridge_action, env.entry_state) == 0.1);
}

TEST_CASE("island: uniform-policy stationary mass on B is epsilon-order") {
  const IslandEnv env = build_island_mdp({0.01, 10, 5});
  const auto mu = stationary_oracle(env.mdp, uniform_policy(env.mdp));
  double mass_b = 0.0;
  for (int s : env.region_b) mass_b += mu[static_cast<std::size_t>(s)];
  CHECK(mass_b > 0.001);  // epsilon-order band [eps/10, 10 eps]
  CHECK(mass_b < 0.1);
}

TEST_CASE("island: constructed MDP validates and rewards split 0/1") {
  const IslandEnv env = build_island_mdp({0.3, 4, 3});
  env.mdp.validate();
  for (int s : env.region_a)
    for (int a = 0; a < 2; ++a) CHECK(env.mdp.r(s, a) == 0.0);
  for (int s : env.region_b)
    for (int a = 0; a < 2; ++a) CHECK(env.mdp.r(s, a) == 1.0);
  CHECK_THROWS_AS(build_island_mdp({0.0, 4, 3}), ValidationError);
  CHECK_THROWS_AS(build_island_mdp({0.5, 0, 3}), ValidationError);
}

TEST_CASE("bottleneck: corridor bounds and the fully open degenerate case") {
  CHECK_THROWS_AS(build_bottleneck_grid(4, 4, 5), ValidationError);
  const BottleneckGrid open = build_bottleneck_grid(4, 4, 4);
  CHECK(open.mdp.n_states == 4 * (2 * 4 + 1));  // no wall cells left
  open.mdp.validate();
}

TEST_CASE("bottleneck: conductance rises with corridor width") {
  auto wall_phi = [](int corridor) {
    const BottleneckGrid grid = build_bottleneck_grid(8, 8, corridor);
    const ChainView chain = chain_from_policy(grid.mdp, uniform_policy(grid.mdp));
    std::vector<int> cut;
    for (int s = 0; s < grid.mdp.n_states; ++s)
      if (grid.col_of(s) < grid.width) cut.push_back(s);
    return conductance(chain, cut);
  };
  const double phi1 = wall_phi(1);
  const double phi2 = wall_phi(2);
  const double phi4 = wall_phi(4);
  const double phi8 = wall_phi(8);
  CHECK(phi1 < phi2);
  CHECK(phi2 < phi4);
  CHECK(phi4 < phi8);
}

TEST_CASE("three ring: spec validation and band geometry") {
  CHECK_THROWS_AS(build_three_ring({8, {0.2, 0.5, 0.8}, 1.0, {1, 2, 3}}), ValidationError);
  CHECK_THROWS_AS(build_three_ring({24, {0.5, 0.2, 0.8}, 1.0, {1, 2, 3}}), ValidationError);
  CHECK_THROWS_AS(build_three_ring({24, {0.2, 0.5, 0.8}, 1.0, {3, 2, 1}}), ValidationError);

  const ThreeRingEnv env = build_three_ring({24, {0.25, 0.55, 0.85}, 1.0, {1, 2, 3}});
  env.mdp.validate();
  CHECK(env.ring_of_state[static_cast<std::size_t>(env.start_state)] == 0);
  for (int ring = 0; ring < 3; ++ring) CHECK(!env.ring_band(ring).empty());
}

TEST_CASE("three ring: zero drift leaves a plain reachable gridworld") {
  ThreeRingSpec spec{16, {0.25, 0.55, 0.85}, 0.0, {1, 2, 3}};
  const ThreeRingEnv env = build_three_ring(spec);
  CHECK(env.mdp.is_deterministic());
  // From the inner ring, breadth-first reachability covers the grid within its diameter.
  std::vector<int> dist(static_cast<std::size_t>(env.mdp.n_states), -1);
  std::vector<int> frontier{env.start_state};
  dist[static_cast<std::size_t>(env.start_state)] = 0;
  std::size_t head = 0;
  std::vector<int> queue = frontier;
  while (head < queue.size()) {
    const int s = queue[head++];
    for (int a = 0; a < env.mdp.n_actions; ++a) {
      const int s2 = env.mdp.successor(s, a);
      if (dist[static_cast<std::size_t>(s2)] < 0) {
        dist[static_cast<std::size_t>(s2)] = dist[static_cast<std::size_t>(s)] + 1;
        queue.push_back(s2);
      }
    }
  }
  const int diameter = 2 * env.resolution;
  for (int s = 0; s < env.mdp.n_states; ++s) {
    CHECK(dist[static_cast<std::size_t>(s)] >= 0);
    CHECK(dist[static_cast<std::size_t>(s)] <= diameter);
  }
}

TEST_CASE("three ring: strong drift slows the climb to the second ring") {
  auto median_climb = [](double drift, int salt) {
    ThreeRingSpec spec{16, {0.25, 0.55, 0.85}, drift, {1, 2, 3}};
    const ThreeRingEnv env = build_three_ring(spec);
    FiniteDensity start;
    start.mass.assign(static_cast<std::size_t>(env.mdp.n_states), 0.0);
    start.mass[static_cast<std::size_t>(env.start_state)] = 1.0;
    Rng rng(900 + salt);
    return hitting_time_mc(env.mdp, uniform_policy(env.mdp), start, env.goal_region(1), 200000,
                           50, rng)
        .median_steps;
  };
  CHECK(median_climb(6.0, 1) > median_climb(0.0, 2));
}

TEST_CASE("three ring: optimal values peak on the outer band") {
  ThreeRingSpec spec{16, {0.25, 0.55, 0.85}, 0.5, {1, 2, 3}};
  const ThreeRingEnv env = build_three_ring(spec);
  const auto v = value_iteration(env.mdp, 1e-9).values;
  double best_outer = -1e300;
  for (int s : env.ring_band(2)) best_outer = std::max(best_outer, v[static_cast<std::size_t>(s)]);
  double best_anywhere = -1e300;
  for (double x : v) best_anywhere = std::max(best_anywhere, x);
  CHECK(best_outer == doctest::Approx(best_anywhere).epsilon(1e-12));
}

TEST_CASE("rollout: length, determinism and seeded replays") {
  const IslandEnv env = build_island_mdp({0.5, 3, 2});
  const PolicyMatrix pi = uniform_policy(env.mdp);

  Rng zero(1);
  const Trajectory empty = rollout(env.mdp, pi, 0, 0, zero);
  CHECK(empty.states.size() == 1);
  CHECK(empty.steps() == 0);
  empty.validate();

  // Deterministic MDP and policy: trajectory independent of the seed.
  const IslandEnv det = build_island_mdp({1.0, 1, 1});
  PolicyMatrix bridge_only;
  bridge_only.n_states = det.mdp.n_states;
  bridge_only.n_actions = 2;
  bridge_only.probs = {0.0, 1.0, 0.0, 1.0};
  Rng s1(100), s2(200);
  const Trajectory t1 = rollout(det.mdp, bridge_only, 0, 6, s1);
  const Trajectory t2 = rollout(det.mdp, bridge_only, 0, 6, s2);
  CHECK(t1.states == t2.states);

  // Stochastic MDP: identical seeds replay identically.
  Rng a(777), b(777);
  const Trajectory ta = rollout(env.mdp, pi, 0, 64, a);
  const Trajectory tb = rollout(env.mdp, pi, 0, 64, b);
  CHECK(ta.states == tb.states);
  CHECK(ta.actions == tb.actions);
  CHECK(ta.rewards == tb.rewards);
}

TEST_CASE("every constructed environment is row-stochastic to 1e-12") {
  build_island_mdp({0.05, 10, 5}).mdp.validate();
  build_bottleneck_grid(6, 6, 2).mdp.validate();
  build_three_ring({20, {0.25, 0.55, 0.85}, 2.0, {1, 2, 3}}).mdp.validate();
}
