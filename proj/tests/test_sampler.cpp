#include <doctest.h>

#include <cmath>
#include <limits>

#include "minddreamer/errors.hpp"
#include "minddreamer/sampler.hpp"

using namespace md;

TEST_CASE("optimal proposal: constant magnitude returns rho itself") {
  const FiniteDensity rho = FiniteDensity::normalized({0.1, 0.2, 0.3, 0.4});
  const auto q = optimal_proposal(rho, {2.5, 2.5, 2.5, 2.5});
  for (std::size_t i = 0; i < 4; ++i) CHECK(q.mass[i] == doctest::Approx(rho.mass[i]).epsilon(1e-14));
}

TEST_CASE("optimal proposal: the four-point hand example") {
  const auto q = optimal_proposal(FiniteDensity::uniform(4), {1.0, 1.0, 2.0, 4.0});
  CHECK(q.mass[0] == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(q.mass[1] == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(q.mass[2] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(q.mass[3] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("optimal proposal: island magnitude lands uniformly on region B") {
  const auto island = island_densities(0.2, 6, 3);
  const auto q = optimal_proposal(FiniteDensity::uniform(9), island.indicator_b);
  for (int s = 0; s < 6; ++s) CHECK(q.mass[static_cast<std::size_t>(s)] == 0.0);
  for (int s = 6; s < 9; ++s)
    CHECK(q.mass[static_cast<std::size_t>(s)] == doctest::Approx(1.0 / 3).epsilon(1e-14));
}

TEST_CASE("optimal proposal: an all-zero product is rejected") {
  CHECK_THROWS_AS(optimal_proposal(FiniteDensity::uniform(3), {0.0, 0.0, 0.0}),
                  ValidationError);
}

TEST_CASE("estimator variance: the optimal proposal is exactly zero variance") {
  const FiniteDensity rho = FiniteDensity::uniform(5);
  const std::vector<double> g{0.5, 1.0, 2.0, 0.25, 1.25};
  const auto q_star = optimal_proposal(rho, g);
  Rng rng(1);
  const auto report = estimator_variance(rho, g, q_star, 20000, rng);
  CHECK(report.analytic_variance == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(report.estimate_mean == doctest::Approx(report.target).epsilon(1e-12));
}

TEST_CASE("estimator variance: sampling under rho is strictly worse than q*") {
  const FiniteDensity rho = FiniteDensity::uniform(4);
  const std::vector<double> g{1.0, 1.0, 2.0, 4.0};
  Rng rng(2);
  const auto under_rho = estimator_variance(rho, g, rho, 50000, rng);
  CHECK(under_rho.analytic_variance > 0.0);
  // Closed form: sum (rho g)^2 / rho - (sum rho g)^2.
  double target = 0.0, second = 0.0;
  for (std::size_t s = 0; s < 4; ++s) {
    target += 0.25 * g[s];
    second += 0.25 * g[s] * g[s];
  }
  CHECK(under_rho.analytic_variance == doctest::Approx(second - target * target).epsilon(1e-12));
  CHECK(std::abs(under_rho.estimate_mean - target) < 0.02);
  CHECK(std::abs(under_rho.estimate_variance - under_rho.analytic_variance) < 0.05);
}

TEST_CASE("estimator variance: missing support is an explicit error") {
  const FiniteDensity rho = FiniteDensity::uniform(3);
  const std::vector<double> g{1.0, 1.0, 1.0};
  const FiniteDensity broken = FiniteDensity::normalized({1.0, 1.0, 0.0});
  Rng rng(3);
  CHECK_THROWS_AS(estimator_variance(rho, g, broken, 10, rng), ValidationError);
}

TEST_CASE("chi2 speedup: identical densities, the island law, and the infinite case") {
  const auto island = island_densities(0.01, 10, 5);
  CHECK(chi2_speedup(island.q_star, island.q_star).chi2 == doctest::Approx(0.0));
  CHECK(chi2_speedup(island.q_star, island.q_star).nu == doctest::Approx(1.0));

  const auto speedup = chi2_speedup(island.q_star, island.q_traj);
  CHECK(std::abs(speedup.chi2 - 99.0) < 1e-10);
  CHECK(std::abs(speedup.nu - 100.0) < 1e-10);

  // Mass of q* where q_traj vanishes: explicit infinity, not a crash.
  const FiniteDensity concentrated = FiniteDensity::normalized({1.0, 0.0});
  const FiniteDensity elsewhere = FiniteDensity::normalized({0.0, 1.0});
  const auto infinite = chi2_speedup(concentrated, elsewhere);
  CHECK(std::isinf(infinite.chi2));
  CHECK(std::isinf(infinite.nu));
}

TEST_CASE("chi2 speedup: nu = 1/epsilon across the epsilon range") {
  for (double eps : {1.0, 0.5, 0.1, 0.05, 0.01}) {
    const auto island = island_densities(eps, 8, 4);
    CHECK(std::abs(chi2_speedup(island.q_star, island.q_traj).nu - 1.0 / eps) < 1e-10);
  }
}

TEST_CASE("variance-ratio oracle: sigma^2 ratio equals 1 + chi2 for the island integrand") {
  const auto island = island_densities(0.1, 10, 5);
  Rng rng(4);
  const auto under_traj =
      estimator_variance(island.q_traj, island.indicator_b, island.q_traj, 0, rng);
  const auto under_star =
      estimator_variance(island.q_traj, island.indicator_b, island.q_star, 0, rng);
  const double ratio = under_traj.analytic_second_moment / under_star.analytic_second_moment;
  CHECK(ratio == doctest::Approx(10.0).epsilon(1e-10));
}
