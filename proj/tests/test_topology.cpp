#include <doctest.h>

#include <cmath>

#include "minddreamer/envs.hpp"
#include "minddreamer/errors.hpp"
#include "minddreamer/topology.hpp"

using namespace md;

TEST_CASE("conductance: a disconnected component has zero flow") {
  // Two 2-state blocks with no cross transitions.
  std::vector<double> kernel{0.5, 0.5, 0.0, 0.0,  //
                             0.5, 0.5, 0.0, 0.0,  //
                             0.0, 0.0, 0.5, 0.5,  //
                             0.0, 0.0, 0.5, 0.5};
  const ChainView chain = chain_from_kernel(kernel, 4);
  CHECK(conductance(chain, {0, 1}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(conductance(chain, {}), ValidationError);
  CHECK_THROWS_AS(conductance(chain, {0, 1, 2, 3}), ValidationError);
}

TEST_CASE("two-state flip chain: conductance p and spectral gap 2p") {
  const double p = 0.3;
  const ChainView chain = chain_from_kernel({1 - p, p, p, 1 - p}, 2);
  CHECK(conductance(chain, {0}) == doctest::Approx(p).epsilon(1e-12));
  const auto spectral = spectral_gap(chain);
  CHECK(spectral.irreducible);
  CHECK(spectral.aperiodic);
  CHECK(spectral.reversible);
  CHECK(spectral.gap == doctest::Approx(2.0 * p).epsilon(1e-7));
}

TEST_CASE("complete-graph chains: with and without self loops") {
  const int n = 6;
  std::vector<double> with_loops(static_cast<std::size_t>(n) * n, 1.0 / n);
  const auto uniform_gap = spectral_gap(chain_from_kernel(with_loops, n));
  CHECK(uniform_gap.gap == doctest::Approx(1.0).epsilon(1e-7));

  std::vector<double> no_loops(static_cast<std::size_t>(n) * n, 1.0 / (n - 1));
  for (int i = 0; i < n; ++i) no_loops[static_cast<std::size_t>(i) * n + i] = 0.0;
  const auto hollow_gap = spectral_gap(chain_from_kernel(no_loops, n));
  CHECK(hollow_gap.gap == doctest::Approx(1.0 - 1.0 / (n - 1)).epsilon(1e-7));
}

TEST_CASE("reducible and periodic chains return gap zero with flags") {
  std::vector<double> reducible{1.0, 0.0, 0.5, 0.5};  // state 0 absorbing
  const auto r = spectral_gap(chain_from_kernel(reducible, 2));
  CHECK(!r.irreducible);
  CHECK(r.gap == 0.0);

  std::vector<double> periodic{0.0, 1.0, 1.0, 0.0};  // two-cycle
  const auto p = spectral_gap(chain_from_kernel(periodic, 2));
  CHECK(p.irreducible);
  CHECK(!p.aperiodic);
  CHECK(p.gap == 0.0);

  const auto lazy = spectral_gap(make_lazy(chain_from_kernel(periodic, 2)));
  CHECK(lazy.aperiodic);
  CHECK(lazy.gap == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("laziness preserves the stationary distribution") {
  const BottleneckGrid grid = build_bottleneck_grid(3, 3, 1);
  const ChainView chain = chain_from_policy(grid.mdp, uniform_policy(grid.mdp));
  const ChainView lazy = make_lazy(chain);
  for (int s = 0; s < chain.n; ++s) {
    double flow = 0.0;
    for (int s2 = 0; s2 < chain.n; ++s2)
      flow += lazy.stationary[static_cast<std::size_t>(s2)] * lazy.k(s2, s);
    CHECK(flow == doctest::Approx(lazy.stationary[static_cast<std::size_t>(s)]).epsilon(1e-8));
  }
}

TEST_CASE("cheeger sandwich on a lazy ring walk") {
  const int n = 10;
  std::vector<double> kernel(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    kernel[static_cast<std::size_t>(i) * n + (i + 1) % n] = 0.5;
    kernel[static_cast<std::size_t>(i) * n + (i + n - 1) % n] = 0.5;
  }
  const ChainView lazy = make_lazy(chain_from_kernel(kernel, n));
  std::vector<std::vector<int>> arcs;
  for (int len = 1; len <= n / 2; ++len) {
    std::vector<int> arc;
    for (int i = 0; i < len; ++i) arc.push_back(i);
    arcs.push_back(arc);
  }
  const double phi = min_conductance(lazy, arcs);
  const double gap = spectral_gap(lazy, 1e-10).gap;
  CHECK(phi * phi / 2.0 <= gap + 1e-12);
  CHECK(gap <= 2.0 * phi + 1e-12);
}

TEST_CASE("hitting times: inside-target starts, censoring, and determinism") {
  const IslandEnv env = build_island_mdp({0.2, 4, 2});
  const PolicyMatrix pi = uniform_policy(env.mdp);
  FiniteDensity inside;
  inside.mass.assign(static_cast<std::size_t>(env.mdp.n_states), 0.0);
  inside.mass[static_cast<std::size_t>(env.entry_state)] = 1.0;
  Rng rng(5);
  const auto zero = hitting_time_mc(env.mdp, pi, inside, env.goal_region(), 100, 25, rng);
  CHECK(zero.median_steps == 0.0);
  CHECK(zero.censored == 0);

  FiniteDensity start;
  start.mass.assign(static_cast<std::size_t>(env.mdp.n_states), 0.0);
  start.mass[0] = 1.0;
  Rng tiny(6);
  const auto censored = hitting_time_mc(env.mdp, pi, start, env.goal_region(), 1, 25, tiny);
  CHECK(censored.censored > 0);

  Rng a(7), b(7);
  const auto r1 = hitting_time_mc(env.mdp, pi, start, env.goal_region(), 100000, 40, a);
  const auto r2 = hitting_time_mc(env.mdp, pi, start, env.goal_region(), 100000, 40, b);
  CHECK(r1.samples == r2.samples);
}

TEST_CASE("island hitting time scales roughly inversely with epsilon") {
  auto median_hit = [](double eps) {
    const IslandEnv env = build_island_mdp({eps, 10, 5});
    FiniteDensity start;
    start.mass.assign(static_cast<std::size_t>(env.mdp.n_states), 0.0);
    start.mass[0] = 1.0;
    Rng rng(8);
    return hitting_time_mc(env.mdp, uniform_policy(env.mdp), start, env.goal_region(), 1000000,
                           200, rng)
        .median_steps;
  };
  const double ratio = median_hit(0.01) / median_hit(0.1);
  CHECK(ratio >= 5.0);
  CHECK(ratio <= 20.0);
}
