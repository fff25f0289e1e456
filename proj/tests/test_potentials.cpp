#include <doctest.h>

#include <cmath>

#include "minddreamer/envs.hpp"
#include "minddreamer/errors.hpp"
#include "minddreamer/potentials.hpp"

using namespace md;

namespace {

// Two-state chain: s0 steps to s1, s1 loops on itself with reward 1.
TabularMdp two_state_chain(double gamma) {
  TabularMdp mdp = TabularMdp::zeros(2, 1, gamma);
  mdp.p(0, 0, 1) = 1.0;
  mdp.p(1, 0, 1) = 1.0;
  mdp.r(1, 0) = 1.0;
  return mdp;
}

// Deterministic line s0 -> s1 -> s2 -> s2, all rewards zero.
TabularMdp three_chain(double gamma) {
  TabularMdp mdp = TabularMdp::zeros(3, 1, gamma);
  mdp.p(0, 0, 1) = 1.0;
  mdp.p(1, 0, 2) = 1.0;
  mdp.p(2, 0, 2) = 1.0;
  return mdp;
}

}  // namespace

TEST_CASE("value iteration: zero rewards give the zero field") {
  TabularMdp mdp = TabularMdp::zeros(4, 2, 0.9);
  for (int s = 0; s < 4; ++s)
    for (int a = 0; a < 2; ++a) mdp.p(s, a, (s + a) % 4) = 1.0;
  const auto v = value_iteration(mdp, 1e-10).values;
  for (double x : v) CHECK(std::abs(x) < 1e-9);
}

TEST_CASE("value iteration: geometric closed form on the two-state chain") {
  const auto v = value_iteration(two_state_chain(0.5), 1e-12).values;
  CHECK(v[1] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("value iteration: myopic limit as gamma vanishes") {
  TabularMdp mdp = two_state_chain(1e-9);
  mdp.r(0, 0) = 0.25;
  const auto v = value_iteration(mdp, 1e-12).values;
  CHECK(std::abs(v[0] - 0.25) < 1e-6);
  CHECK(std::abs(v[1] - 1.0) < 1e-6);
}

TEST_CASE("value iteration: impossible tolerance raises a residual-carrying error") {
  CHECK_THROWS_AS(value_iteration(two_state_chain(0.9), 1e-300), ConvergenceError);
  CHECK_THROWS_AS(value_iteration(two_state_chain(0.9), -1.0), ValidationError);
}

TEST_CASE("uncertainty iteration: zero shocks give zero, absorbing shock gives 1/(1-g^2)") {
  TabularMdp mdp = TabularMdp::zeros(1, 1, 0.9);
  mdp.p(0, 0, 0) = 1.0;
  const auto zero = uncertainty_value_iteration(mdp, InfoField::zeros(1, 1), 1e-12).values;
  CHECK(std::abs(zero[0]) < 1e-10);

  const InfoField ones = InfoField::constant(1, 1, 1.0);
  const auto quad = uncertainty_value_iteration(mdp, ones, 1e-12).values;
  CHECK(quad[0] == doctest::Approx(1.0 / (1.0 - 0.81)).epsilon(1e-9));

  const auto plain = uncertainty_value_iteration(mdp, ones, 1e-12, {}, false).values;
  CHECK(plain[0] == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("relay value: unreachable anchor with zero rewards is worth nothing") {
  TabularMdp mdp = TabularMdp::zeros(3, 1, 0.9);
  mdp.p(0, 0, 0) = 1.0;  // s0 loops; s2 unreachable from s0
  mdp.p(1, 0, 0) = 1.0;
  mdp.p(2, 0, 2) = 1.0;
  std::vector<double> v_phi{0.0, 0.0, 5.0};
  const auto column = relay_value_column(mdp, v_phi, 2, 1e-12);
  CHECK(std::abs(column[0]) < 1e-10);
  CHECK(std::abs(column[1]) < 1e-10);
  CHECK(column[2] == 5.0);
}

TEST_CASE("relay value: two-hop chain discounts the anchor bootstrap") {
  const TabularMdp mdp = three_chain(0.9);
  std::vector<double> v_phi{0.0, 0.0, 10.0};
  const auto column = relay_value_column(mdp, v_phi, 2, 1e-12);
  CHECK(column[0] == doctest::Approx(8.1).epsilon(1e-10));
  CHECK(column[1] == doctest::Approx(9.0).epsilon(1e-10));
}

TEST_CASE("relay uncertainty: zero shocks and zero bootstrap stay at zero") {
  const TabularMdp mdp = three_chain(0.9);
  const PolicyMatrix pi = uniform_policy(mdp);
  std::vector<double> u{0.0, 0.0, 0.0};
  const auto column =
      relay_uncertainty_column(mdp, InfoField::zeros(3, 1), u, 2, pi, 1e-12);
  for (double x : column) CHECK(std::abs(x) < 1e-12);
}

TEST_CASE("relay uncertainty: constant shocks on a chain sum a gamma^2 geometric series") {
  const int length = 5;
  TabularMdp mdp = TabularMdp::zeros(length + 1, 1, 0.9);
  for (int s = 0; s < length; ++s) mdp.p(s, 0, s + 1) = 1.0;
  mdp.p(length, 0, length) = 1.0;
  const double sigma2 = 0.7;
  const InfoField info = InfoField::constant(length + 1, 1, sigma2);
  std::vector<double> u(static_cast<std::size_t>(length + 1), 0.0);
  const auto column =
      relay_uncertainty_column(mdp, info, u, length, uniform_policy(mdp), 1e-12);
  double expected = 0.0;
  for (int t = 0; t < length; ++t) expected += std::pow(0.81, t) * sigma2;
  CHECK(column[0] == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("relay operators contract at gamma and gamma squared") {
  Rng rng(321);
  TabularMdp mdp = TabularMdp::zeros(6, 2, 0.9);
  for (int s = 0; s < 6; ++s)
    for (int a = 0; a < 2; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < 6; ++s2) sum += mdp.p(s, a, s2) = 0.1 + rng.next_double();
      for (int s2 = 0; s2 < 6; ++s2) mdp.p(s, a, s2) /= sum;
      double acc = 0.0;
      for (int s2 = 0; s2 < 5; ++s2) acc += mdp.p(s, a, s2);
      mdp.p(s, a, 5) = 1.0 - acc;
      mdp.r(s, a) = rng.next_double();
    }
  std::vector<double> v_phi(6, 1.0);
  const InfoField info = InfoField::constant(6, 2, 0.4);
  const PolicyMatrix pi = uniform_policy(mdp);

  RelayTable t1 = RelayTable::zeros(6, RelayTable::Kind::pragmatic);
  RelayTable t2 = t1;
  for (double& v : t1.entries) v = 4.0 * rng.next_double();
  for (double& v : t2.entries) v = 4.0 * rng.next_double();
  double delta = 0.0;
  for (std::size_t i = 0; i < t1.entries.size(); ++i)
    delta = std::max(delta, std::abs(t1.entries[i] - t2.entries[i]));

  const RelayTable v1 = relay_value_operator(mdp, v_phi, t1);
  const RelayTable v2 = relay_value_operator(mdp, v_phi, t2);
  double dv = 0.0;
  for (std::size_t i = 0; i < v1.entries.size(); ++i)
    dv = std::max(dv, std::abs(v1.entries[i] - v2.entries[i]));
  CHECK(dv <= 0.9 * delta + 1e-12);

  const RelayTable u1 = relay_uncertainty_operator(mdp, info, v_phi, pi, t1);
  const RelayTable u2 = relay_uncertainty_operator(mdp, info, v_phi, pi, t2);
  double du = 0.0;
  for (std::size_t i = 0; i < u1.entries.size(); ++i)
    du = std::max(du, std::abs(u1.entries[i] - u2.entries[i]));
  CHECK(du <= 0.81 * delta + 1e-12);
}

TEST_CASE("oracle: diagonal convention and the two-hop chain") {
  const TabularMdp mdp = three_chain(0.9);
  std::vector<double> v_phi{1.5, 0.0, 10.0};
  CHECK(brute_force_relay_oracle(mdp, v_phi, 0, 0, 10) == 1.5);
  CHECK(brute_force_relay_oracle(mdp, v_phi, 0, 2, 10) == doctest::Approx(8.1).epsilon(1e-12));
  CHECK_THROWS_AS(brute_force_relay_oracle(mdp, v_phi, 0, 2, 1000000), ValidationError);
}

TEST_CASE("relay advantage: optimal bootstrap zeroes it, empty bootstrap exposes the gateway") {
  const TabularMdp mdp = three_chain(0.9);
  TabularMdp rewarded = mdp;
  rewarded.r(2, 0) = 1.0;
  const auto v_star = value_iteration(rewarded, 1e-12).values;
  const RelayTable at_optimum = relay_value_table(rewarded, v_star, 1e-12);
  for (double d : relay_advantage(at_optimum, v_star)) CHECK(std::abs(d) < 1e-6);

  // Zero bootstrap on the reward-free chain: anchor s2 with v_phi(s2)=10 via a
  // field that is zero elsewhere exposes s2 as the gateway.
  std::vector<double> sparse{0.0, 0.0, 10.0};
  const RelayTable table = relay_value_table(mdp, sparse, 1e-12);
  const auto delta = relay_advantage(table, {0.0, 0.0, 10.0});
  CHECK(delta[0] == doctest::Approx(8.1).epsilon(1e-9));
  CHECK(relay_gateway(table, {0.0, 0.0, 10.0}, 0) == 2);
  CHECK(relay_gateway(table, {0.0, 0.0, 10.0}, 1) == 2);
}

TEST_CASE("relay advantage: the gateway is the state with the largest value mismatch") {
  // Line graph, zero rewards; the bootstrap field knows value only at state 4.
  TabularMdp mdp = TabularMdp::zeros(6, 2, 0.8);
  for (int s = 0; s < 6; ++s) {
    mdp.p(s, 0, std::max(s - 1, 0)) = 1.0;
    mdp.p(s, 1, std::min(s + 1, 5)) = 1.0;
  }
  std::vector<double> v_phi{0.0, 0.0, 0.0, 0.0, 10.0, 0.0};
  const RelayTable table = relay_value_table(mdp, v_phi, 1e-12);
  for (int s = 0; s < 6; ++s) {
    if (s == 4) continue;
    CHECK(relay_gateway(table, v_phi, s) == 4);
    const double direct = std::pow(0.8, std::abs(s - 4)) * 10.0;
    CHECK(table.at(s, 4) == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("hallucination check: zero deviation means zero error, bounds take the stated form") {
  const auto field = make_lipschitz_line_field(24, 1.0, 5);
  const auto at_zero = hallucination_bound_check(field, 1.0, 0.0, 0.9, 8);
  CHECK(at_zero.bound_main == 0.0);
  CHECK(at_zero.bound_appendix == 0.0);
  CHECK(at_zero.measured <= 1e-12);

  const auto spec_point = hallucination_bound_check(field, 2.0, 0.1, 0.9, 8);
  CHECK(spec_point.bound_appendix == doctest::Approx(2.0).epsilon(1e-12));

  const auto unit = hallucination_bound_check(make_lipschitz_line_field(32, 1.0, 9), 1.0, 0.5,
                                              0.5, 8);
  CHECK(unit.measured <= 1.0);
  CHECK(unit.measured <= unit.bound_appendix);
}

TEST_CASE("lipschitz line fields respect their slope budget") {
  const auto field = make_lipschitz_line_field(40, 2.0, 11);
  for (std::size_t i = 1; i < field.size(); ++i)
    CHECK(std::abs(field[i] - field[i - 1]) <= 2.0);
}
