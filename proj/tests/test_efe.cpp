#include <doctest.h>

#include <cmath>

#include "minddreamer/efe.hpp"
#include "minddreamer/errors.hpp"

using namespace md;

TEST_CASE("efe: independent likelihood kills the epistemic term") {
  DiscreteJointModel model;
  model.prior_s = {0.3, 0.7};
  model.likelihood = {{0.6, 0.4}, {0.6, 0.4}};
  model.preference = {0.5, 0.5};
  const auto d = efe_decompose(model);
  CHECK(std::abs(d.epistemic) < 1e-12);
  CHECK(d.g == doctest::Approx(-d.pragmatic).epsilon(1e-12));
}

TEST_CASE("efe: deterministic likelihood with a uniform prior yields ln n") {
  DiscreteJointModel model;
  model.prior_s = {0.25, 0.25, 0.25, 0.25};
  model.likelihood = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
  model.preference = {0.25, 0.25, 0.25, 0.25};
  const auto d = efe_decompose(model);
  CHECK(d.epistemic == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("efe: 2x2 model against exhaustive enumeration") {
  DiscreteJointModel model;
  model.prior_s = {0.5, 0.5};
  model.likelihood = {{0.9, 0.1}, {0.2, 0.8}};
  model.preference = {0.7, 0.3};

  // Independent enumeration over the four joint outcomes.
  double marginal[2] = {0.0, 0.0};
  for (int s = 0; s < 2; ++s)
    for (int o = 0; o < 2; ++o) marginal[o] += model.prior_s[s] * model.likelihood[s][o];
  double mutual = 0.0;
  double pragmatic = 0.0;
  for (int o = 0; o < 2; ++o) {
    pragmatic += marginal[o] * std::log(model.preference[o]);
    for (int s = 0; s < 2; ++s) {
      const double joint = model.prior_s[s] * model.likelihood[s][o];
      mutual += joint * std::log(joint / (model.prior_s[s] * marginal[o]));
    }
  }

  const auto d = efe_decompose(model);
  CHECK(d.epistemic == doctest::Approx(mutual).epsilon(1e-12));
  CHECK(d.pragmatic == doctest::Approx(pragmatic).epsilon(1e-12));
  CHECK(d.g == doctest::Approx(-mutual - pragmatic).epsilon(1e-10));
  CHECK(d.identity_residual < 1e-10);
}

TEST_CASE("efe: zero preference mass is a validation error") {
  DiscreteJointModel model;
  model.prior_s = {0.5, 0.5};
  model.likelihood = {{0.9, 0.1}, {0.2, 0.8}};
  model.preference = {1.0, 0.0};
  CHECK_THROWS_AS(efe_decompose(model), ValidationError);
}

namespace {

TabularMdp state_reward_mdp(int n, double gamma, Rng& rng) {
  TabularMdp mdp = TabularMdp::zeros(n, 2, gamma);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < 2; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < n; ++s2) sum += mdp.p(s, a, s2) = 0.2 + rng.next_double();
      for (int s2 = 0; s2 < n; ++s2) mdp.p(s, a, s2) /= sum;
      double acc = 0.0;
      for (int s2 = 0; s2 < n - 1; ++s2) acc += mdp.p(s, a, s2);
      mdp.p(s, a, n - 1) = 1.0 - acc;
    }
    const double r = rng.next_double();
    mdp.r(s, 0) = r;
    mdp.r(s, 1) = r;
  }
  return mdp;
}

PolicyMatrix random_policy(int n, int n_actions, Rng& rng) {
  PolicyMatrix pi;
  pi.n_states = n;
  pi.n_actions = n_actions;
  pi.probs.assign(static_cast<std::size_t>(n) * n_actions, 0.0);
  for (int s = 0; s < n; ++s) {
    double sum = 0.0;
    for (int a = 0; a < n_actions; ++a) sum += pi.at(s, a) = 0.1 + rng.next_double();
    for (int a = 0; a < n_actions; ++a) pi.at(s, a) /= sum;
    double acc = 0.0;
    for (int a = 0; a < n_actions - 1; ++a) acc += pi.at(s, a);
    pi.at(s, n_actions - 1) = 1.0 - acc;
  }
  return pi;
}

}  // namespace

TEST_CASE("maxent gap: policy invariant and linear in alpha") {
  Rng rng(2024);
  const TabularMdp mdp = state_reward_mdp(4, 0.9, rng);
  const std::vector<double> start(4, 0.25);

  const double gap1 = maxent_gap(mdp, random_policy(4, 2, rng), 1.0, start);
  const double gap2 = maxent_gap(mdp, random_policy(4, 2, rng), 1.0, start);
  CHECK(gap1 == doctest::Approx(gap2).epsilon(1e-10));

  for (double alpha : {1.0, 2.0}) {
    double z = 0.0;
    for (int s = 0; s < 4; ++s) z += std::exp(mdp.r(s, 0) / alpha);
    const double expected = alpha * std::log(z) / (1.0 - 0.9);
    const double gap = maxent_gap(mdp, random_policy(4, 2, rng), alpha, start);
    CHECK(gap == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("maxent gap: single deterministic state matches ln Z / (1 - gamma)") {
  TabularMdp mdp = TabularMdp::zeros(1, 1, 0.8);
  mdp.p(0, 0, 0) = 1.0;
  mdp.r(0, 0) = 0.4;
  PolicyMatrix pi;
  pi.n_states = 1;
  pi.n_actions = 1;
  pi.probs = {1.0};
  const double gap = maxent_gap(mdp, pi, 1.0, {1.0});
  CHECK(gap == doctest::Approx(0.4 / 0.2).epsilon(1e-10));  // ln Z = r / alpha here
}

TEST_CASE("maxent gap: action-dependent rewards are rejected") {
  TabularMdp mdp = TabularMdp::zeros(2, 2, 0.9);
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) mdp.p(s, a, (s + a) % 2) = 1.0;
  mdp.r(0, 0) = 0.1;
  mdp.r(0, 1) = 0.9;
  CHECK_THROWS_AS(maxent_gap(mdp, uniform_policy(mdp), 1.0, {0.5, 0.5}), ValidationError);
}

TEST_CASE("gaussian kl: closed-form spot checks") {
  const auto same = gaussian_kl_pair({1.3, 0.7}, {1.3, 0.7});
  CHECK(same.exact == doctest::Approx(0.0));
  CHECK(same.second_order == doctest::Approx(0.0));

  const auto shifted = gaussian_kl_pair({0.0, 1.0}, {1.0, 1.0});
  CHECK(shifted.exact == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(shifted.second_order == doctest::Approx(0.5).epsilon(1e-12));

  const auto near = gaussian_kl_pair({0.0, 1.01 * 1.01}, {0.1, 1.0});
  CHECK(std::abs(near.exact - near.second_order) / near.exact < 0.05);
  CHECK_THROWS_AS(gaussian_kl_pair({0.0, -1.0}, {0.0, 1.0}), ValidationError);
}

TEST_CASE("shock variance: gamma 0 keeps only the first shock") {
  ShockSchedule schedule{0.0, {0.9, 0.5, 0.4}};
  Rng rng(3);
  const auto report = discounted_shock_variance(schedule, 10000, rng);
  CHECK(report.analytic == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("shock variance: 50-step geometric sum and Monte Carlo agreement") {
  ShockSchedule schedule{0.9, std::vector<double>(50, 1.0)};
  Rng rng(4);
  const auto report = discounted_shock_variance(schedule, 100000, rng);
  const double closed = (1.0 - std::pow(0.81, 50)) / 0.19;
  CHECK(report.analytic == doctest::Approx(closed).epsilon(1e-12));
  CHECK(std::abs(report.monte_carlo - report.analytic) <= 3.0 * report.ci_halfwidth);
}

TEST_CASE("fisher surrogate: vanishing prior, prior point and monotone contraction") {
  Rng tight_rng(5);
  const auto tight = fisher_surrogate_check({1e-12, 1.0, 0.0}, 0, 10000, tight_rng);
  CHECK(tight.surrogate < 1e-11);
  CHECK(tight.mean_kl_gain < 1e-9);

  Rng prior_rng(6);
  const auto prior_point = fisher_surrogate_check({1.0, 1.0, 0.0}, 0, 200000, prior_rng);
  CHECK(prior_point.surrogate == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(prior_point.mean_kl_gain - prior_point.analytic_gain) /
            prior_point.analytic_gain <
        0.05);

  double previous = 1e300;
  for (int n_obs : {0, 2, 8, 32}) {
    Rng rng(7);
    const auto report = fisher_surrogate_check({1.0, 1.0, 0.3}, n_obs, 1, rng);
    CHECK(report.surrogate < previous);
    previous = report.surrogate;
  }
}
