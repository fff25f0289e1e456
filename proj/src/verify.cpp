#include "minddreamer/verify.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>

#include "minddreamer/efe.hpp"
#include "minddreamer/envs.hpp"
#include "minddreamer/errors.hpp"
#include "minddreamer/potentials.hpp"
#include "minddreamer/sampler.hpp"
#include "minddreamer/topology.hpp"

namespace md {

namespace {

TabularMdp random_mdp(Rng& rng, int n, int n_actions, double gamma) {
  TabularMdp mdp = TabularMdp::zeros(n, n_actions, gamma);
  for (int s = 0; s < n; ++s)
    for (int a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < n; ++s2) {
        const double w = rng.next_double();
        mdp.p(s, a, s2) = w * w;  // squared uniforms give uneven rows
        sum += w * w;
      }
      for (int s2 = 0; s2 < n; ++s2) mdp.p(s, a, s2) /= sum;
      // renormalize exactly
      double acc = 0.0;
      for (int s2 = 0; s2 < n - 1; ++s2) acc += mdp.p(s, a, s2);
      mdp.p(s, a, n - 1) = 1.0 - acc;
      mdp.r(s, a) = rng.next_double();
    }
  return mdp;
}

bool deterministic_strongly_connected(const TabularMdp& mdp) {
  const int n = mdp.n_states;
  auto reachable_from = [&](int start) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{start};
    seen[static_cast<std::size_t>(start)] = 1;
    while (!stack.empty()) {
      const int s = stack.back();
      stack.pop_back();
      for (int a = 0; a < mdp.n_actions; ++a) {
        const int s2 = mdp.successor(s, a);
        if (!seen[static_cast<std::size_t>(s2)]) {
          seen[static_cast<std::size_t>(s2)] = 1;
          stack.push_back(s2);
        }
      }
    }
    return seen;
  };
  for (int s = 0; s < n; ++s) {
    const auto seen = reachable_from(s);
    for (int t = 0; t < n; ++t)
      if (!seen[static_cast<std::size_t>(t)]) return false;
  }
  return true;
}

TabularMdp random_deterministic_mdp(Rng& rng, int n, int n_actions, double gamma) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    TabularMdp mdp = TabularMdp::zeros(n, n_actions, gamma);
    for (int s = 0; s < n; ++s)
      for (int a = 0; a < n_actions; ++a) {
        // A ring edge in action 0 guarantees connectivity shows up quickly.
        const int s2 = a == 0 && rng.next_double() < 0.5
                           ? (s + 1) % n
                           : static_cast<int>(rng.next_index(static_cast<std::size_t>(n)));
        mdp.p(s, a, s2) = 1.0;
        mdp.r(s, a) = rng.next_double();
      }
    if (deterministic_strongly_connected(mdp)) return mdp;
  }
  throw ConvergenceError("random_deterministic_mdp: no strongly connected draw", 0.0);
}

RelayTable random_table(Rng& rng, int n, RelayTable::Kind kind, double scale) {
  RelayTable t = RelayTable::zeros(n, kind);
  for (double& v : t.entries) v = scale * (2.0 * rng.next_double() - 1.0);
  return t;
}

double table_sup_diff(const RelayTable& a, const RelayTable& b) {
  double sup = 0.0;
  for (std::size_t i = 0; i < a.entries.size(); ++i)
    sup = std::max(sup, std::abs(a.entries[i] - b.entries[i]));
  return sup;
}

CheckResult make_check(std::string id, std::string property, double tolerance, double measured,
                       bool pass_when_leq = true) {
  CheckResult check;
  check.id = std::move(id);
  check.property = std::move(property);
  check.tolerance = tolerance;
  check.measured = measured;
  check.passed = pass_when_leq ? measured <= tolerance : measured >= tolerance;
  return check;
}

}  // namespace

std::vector<CheckResult> verify_potentials() {
  std::vector<CheckResult> out;
  Rng rng(0x9d7f3a1cull);

  // Relay operator contraction, pragmatic (factor gamma) and epistemic (gamma^2):
  // 100 table pairs spread over 10 random MDPs with n <= 30.
  {
    double worst_v = -1.0;
    double worst_u = -1.0;
    for (int m = 0; m < 10; ++m) {
      const int n = 5 + static_cast<int>(rng.next_index(26));
      const double gamma = 0.85 + 0.1 * rng.next_double();
      const TabularMdp mdp = random_mdp(rng, n, 3, gamma);
      std::vector<double> v_phi(static_cast<std::size_t>(n));
      std::vector<double> u_boot(static_cast<std::size_t>(n));
      for (auto& v : v_phi) v = 5.0 * rng.next_double();
      for (auto& v : u_boot) v = 2.0 * rng.next_double();
      const InfoField info = InfoField::constant(n, 3, 0.3);
      const PolicyMatrix uniform = uniform_policy(mdp);
      for (int pair = 0; pair < 10; ++pair) {
        const RelayTable t1 = random_table(rng, n, RelayTable::Kind::pragmatic, 5.0);
        const RelayTable t2 = random_table(rng, n, RelayTable::Kind::pragmatic, 5.0);
        const double delta = table_sup_diff(t1, t2);
        const double dv = table_sup_diff(relay_value_operator(mdp, v_phi, t1),
                                         relay_value_operator(mdp, v_phi, t2));
        worst_v = std::max(worst_v, dv - gamma * delta);
        const double du =
            table_sup_diff(relay_uncertainty_operator(mdp, info, u_boot, uniform, t1),
                           relay_uncertainty_operator(mdp, info, u_boot, uniform, t2));
        worst_u = std::max(worst_u, du - gamma * gamma * delta);
      }
    }
    out.push_back(make_check("relay-contraction-pragmatic",
                             "||T_V A - T_V B|| <= gamma ||A - B|| over 100 random table pairs",
                             1e-12, worst_v));
    out.push_back(make_check("relay-contraction-epistemic",
                             "||T_U A - T_U B|| <= gamma^2 ||A - B|| over 100 random table pairs",
                             1e-12, worst_u));
  }

  // Monotonicity of the pragmatic operator.
  {
    double worst = -1.0;
    for (int m = 0; m < 5; ++m) {
      const int n = 4 + static_cast<int>(rng.next_index(10));
      const TabularMdp mdp = random_mdp(rng, n, 3, 0.9);
      std::vector<double> v_phi(static_cast<std::size_t>(n), 1.0);
      const RelayTable t1 = random_table(rng, n, RelayTable::Kind::pragmatic, 3.0);
      RelayTable t2 = t1;
      for (double& v : t2.entries) v += 2.0 * rng.next_double();
      const RelayTable a = relay_value_operator(mdp, v_phi, t1);
      const RelayTable b = relay_value_operator(mdp, v_phi, t2);
      for (std::size_t i = 0; i < a.entries.size(); ++i)
        worst = std::max(worst, a.entries[i] - b.entries[i]);
    }
    out.push_back(make_check("relay-monotonicity",
                             "A <= B pointwise implies T_V A <= T_V B pointwise", 1e-12, worst));
  }

  // Global optimality and dominance on the small-MDP suite (n <= 50).
  {
    std::vector<TabularMdp> suite;
    suite.push_back(random_mdp(rng, 30, 3, 0.9));
    suite.push_back(random_mdp(rng, 50, 2, 0.9));
    suite.push_back(random_deterministic_mdp(rng, 12, 3, 0.9));
    suite.push_back(build_island_mdp({0.1, 6, 4}).mdp);
    suite.push_back(build_bottleneck_grid(3, 3, 2).mdp);
    double worst_equality = 0.0;
    double worst_dominance = -1.0;
    for (const auto& mdp : suite) {
      const auto v_star = value_iteration(mdp, 1e-12).values;
      const RelayTable table = relay_value_table(mdp, v_star, 1e-12);
      for (int s = 0; s < mdp.n_states; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        for (int anchor = 0; anchor < mdp.n_states; ++anchor) {
          best = std::max(best, table.at(s, anchor));
          worst_dominance =
              std::max(worst_dominance, table.at(s, anchor) - v_star[static_cast<std::size_t>(s)]);
        }
        worst_equality =
            std::max(worst_equality, std::abs(best - v_star[static_cast<std::size_t>(s)]));
      }
    }
    out.push_back(make_check("relay-global-optimality",
                             "max_anchor RVF(s, anchor) recovers V*(s) on every suite MDP", 1e-6,
                             worst_equality));
    out.push_back(make_check("relay-dominance", "RVF(s, anchor) <= V*(s) everywhere", 1e-9,
                             worst_dominance));
  }

  // Fixed point vs the k-step dynamic-programming oracle on 20 deterministic MDPs.
  {
    double worst = 0.0;
    for (int m = 0; m < 20; ++m) {
      const TabularMdp mdp = random_deterministic_mdp(rng, 6, 3, 0.9);
      std::vector<double> v_phi(6, 100.0);  // dominant bootstrap keeps hitting optimal
      for (int anchor = 0; anchor < 6; ++anchor) {
        const auto column = relay_value_column(mdp, v_phi, anchor, 1e-12);
        for (int s = 0; s < 6; ++s) {
          const double oracle = brute_force_relay_oracle(mdp, v_phi, s, anchor, 50);
          worst = std::max(worst, std::abs(column[static_cast<std::size_t>(s)] - oracle));
        }
      }
    }
    out.push_back(make_check("relay-oracle-equivalence",
                             "absorbing fixed point matches the k-step path oracle "
                             "(20 deterministic 6-state MDPs, max_k 50)",
                             1e-6, worst));
  }

  // Fixed-point uniqueness: iterating the operator from two random tables.
  {
    double worst = 0.0;
    for (int m = 0; m < 3; ++m) {
      const int n = 6 + static_cast<int>(rng.next_index(6));
      const TabularMdp mdp = random_mdp(rng, n, 2, 0.9);
      std::vector<double> v_phi(static_cast<std::size_t>(n));
      for (auto& v : v_phi) v = rng.next_double();
      RelayTable a = random_table(rng, n, RelayTable::Kind::pragmatic, 10.0);
      RelayTable b = random_table(rng, n, RelayTable::Kind::pragmatic, 10.0);
      for (int sweep = 0; sweep < 500; ++sweep) {
        RelayTable a2 = relay_value_operator(mdp, v_phi, a);
        RelayTable b2 = relay_value_operator(mdp, v_phi, b);
        const double res = std::max(table_sup_diff(a2, a), table_sup_diff(b2, b));
        a = std::move(a2);
        b = std::move(b2);
        if (res < 1e-13) break;
      }
      worst = std::max(worst, table_sup_diff(a, b));
    }
    out.push_back(make_check("relay-uniqueness",
                             "two random initializations converge to the same table", 1e-9,
                             worst));
  }

  // Epistemic horizon: gamma^2 columns never exceed gamma columns.
  {
    double worst = -1.0;
    for (int m = 0; m < 5; ++m) {
      const int n = 5 + static_cast<int>(rng.next_index(8));
      const TabularMdp mdp = random_mdp(rng, n, 3, 0.9);
      InfoField info = InfoField::zeros(n, 3);
      for (double& v : info.shocks) v = rng.next_double();
      std::vector<double> u_boot(static_cast<std::size_t>(n));
      for (auto& v : u_boot) v = rng.next_double();
      const PolicyMatrix uniform = uniform_policy(mdp);
      for (int anchor = 0; anchor < n; ++anchor) {
        const auto quad =
            relay_uncertainty_column(mdp, info, u_boot, anchor, uniform, 1e-12, true);
        const auto plain =
            relay_uncertainty_column(mdp, info, u_boot, anchor, uniform, 1e-12, false);
        for (int s = 0; s < n; ++s)
          worst = std::max(worst, quad[static_cast<std::size_t>(s)] -
                                      plain[static_cast<std::size_t>(s)]);
      }
    }
    out.push_back(make_check("epistemic-horizon",
                             "gamma^2-discounted columns are pointwise <= gamma-discounted",
                             1e-12, worst));
  }

  // Hallucination bound: measured perturbation error within L*delta/(1-gamma)
  // on a 10-point (L, delta, gamma) grid.
  {
    double worst = -1.0;
    double example_bound = 0.0;
    const double ls[] = {0.5, 1.0, 2.0};
    const double deltas[] = {0.0, 0.25, 0.5};
    const double gammas[] = {0.5, 0.9};
    int points = 0;
    for (double l : ls)
      for (double d : deltas) {
        if (points >= 10) break;
        const double g = gammas[points % 2];
        const auto field = make_lipschitz_line_field(24, l, 42 + points);
        const auto check = hallucination_bound_check(field, l, d, g, 10);
        worst = std::max(worst, check.measured - check.bound_appendix);
        ++points;
      }
    example_bound = hallucination_bound_check(make_lipschitz_line_field(24, 2.0, 7), 2.0, 0.1,
                                              0.9, 10)
                        .bound_appendix;
    out.push_back(make_check("hallucination-bound",
                             "measured anchor perturbation error <= L delta / (1 - gamma)",
                             1e-12, worst));
    out.push_back(make_check("hallucination-bound-form",
                             "appendix bound evaluates to 2.0 at L=2, delta=0.1, gamma=0.9",
                             1e-12, std::abs(example_bound - 2.0)));
  }

  return out;
}

std::vector<CheckResult> verify_efe() {
  std::vector<CheckResult> out;
  Rng rng(0x51a9e2b7ull);

  // Decomposition identity and mutual-information bounds over 1000 random models.
  {
    double worst_identity = 0.0;
    double worst_mi_low = -1.0;
    double worst_mi_high = -1.0;
    for (int m = 0; m < 1000; ++m) {
      const int ns = 2 + static_cast<int>(rng.next_index(4));
      const int no = 2 + static_cast<int>(rng.next_index(4));
      DiscreteJointModel model;
      model.prior_s.resize(static_cast<std::size_t>(ns));
      model.preference.resize(static_cast<std::size_t>(no));
      double sum = 0.0;
      for (auto& v : model.prior_s) sum += v = 0.05 + rng.next_double();
      for (auto& v : model.prior_s) v /= sum;
      sum = 0.0;
      for (auto& v : model.preference) sum += v = 0.05 + rng.next_double();
      for (auto& v : model.preference) v /= sum;
      model.likelihood.assign(static_cast<std::size_t>(ns),
                              std::vector<double>(static_cast<std::size_t>(no)));
      for (auto& row : model.likelihood) {
        sum = 0.0;
        for (auto& v : row) sum += v = 0.05 + rng.next_double();
        for (auto& v : row) v /= sum;
      }
      // exact renormalization against accumulated rounding
      auto renorm = [](std::vector<double>& p) {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < p.size(); ++i) acc += p[i];
        p.back() = 1.0 - acc;
      };
      renorm(model.prior_s);
      renorm(model.preference);
      for (auto& row : model.likelihood) renorm(row);

      const auto d = efe_decompose(model);
      worst_identity = std::max(worst_identity, d.identity_residual);
      worst_mi_low = std::max(worst_mi_low, -d.epistemic);
      double h_s = 0.0;
      for (double v : model.prior_s)
        if (v > 0.0) h_s -= v * std::log(v);
      std::vector<double> marginal(static_cast<std::size_t>(no), 0.0);
      for (int s = 0; s < ns; ++s)
        for (int o = 0; o < no; ++o)
          marginal[static_cast<std::size_t>(o)] +=
              model.prior_s[static_cast<std::size_t>(s)] *
              model.likelihood[static_cast<std::size_t>(s)][static_cast<std::size_t>(o)];
      double h_o = 0.0;
      for (double v : marginal)
        if (v > 0.0) h_o -= v * std::log(v);
      worst_mi_high = std::max(worst_mi_high, d.epistemic - std::min(h_s, h_o));
    }
    out.push_back(make_check("efe-decomposition-identity",
                             "G + I(s;o) + E ln p(o|C) vanishes on 1000 random models", 1e-10,
                             worst_identity));
    out.push_back(make_check("mutual-information-bounds",
                             "0 <= I(s;o) <= min(H(s), H(o)) on the same models", 1e-10,
                             std::max(worst_mi_low, worst_mi_high)));
  }

  // MaxEnt equivalence: the gap is policy-invariant and matches the closed form.
  {
    TabularMdp mdp = random_mdp(rng, 5, 3, 0.9);
    for (int s = 0; s < 5; ++s) {
      const double r = rng.next_double();
      for (int a = 0; a < 3; ++a) mdp.r(s, a) = r;  // state rewards
    }
    const std::vector<double> start(5, 0.2);
    const double alpha = 0.7;
    double z = 0.0;
    for (int s = 0; s < 5; ++s) z += std::exp(mdp.r(s, 0) / alpha);
    const double expected_gap = alpha * std::log(z) / (1.0 - mdp.gamma);

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int p = 0; p < 12; ++p) {
      PolicyMatrix pi = uniform_policy(mdp);
      for (int s = 0; s < 5; ++s) {
        double sum = 0.0;
        for (int a = 0; a < 3; ++a) sum += pi.at(s, a) = 0.05 + rng.next_double();
        for (int a = 0; a < 3; ++a) pi.at(s, a) /= sum;
        double acc = 0.0;
        for (int a = 0; a < 2; ++a) acc += pi.at(s, a);
        pi.at(s, 2) = 1.0 - acc;
      }
      const double gap = maxent_gap(mdp, pi, alpha, start);
      lo = std::min(lo, gap);
      hi = std::max(hi, gap);
    }
    out.push_back(make_check("maxent-gap-policy-invariance",
                             "the scaled-objective gap is identical across 12 random policies",
                             1e-8, hi - lo));
    out.push_back(make_check("maxent-gap-closed-form",
                             "gap equals alpha ln Z / (1 - gamma)", 1e-8,
                             std::abs(hi - expected_gap)));
  }

  // Gaussian KL second-order proxy.
  {
    const auto equal_var = gaussian_kl_pair({0.1, 1.0}, {0.0, 1.0});
    const double exact_equal = std::abs(equal_var.exact - equal_var.second_order);
    const auto near_var = gaussian_kl_pair({0.1, 1.01 * 1.01}, {0.0, 1.0});
    const double rel = std::abs(near_var.exact - near_var.second_order) / near_var.exact;
    out.push_back(make_check("gaussian-kl-equal-variance",
                             "equal variances make the quadratic form exact", 1e-12, exact_equal));
    out.push_back(make_check("gaussian-kl-proxy-error",
                             "relative error of the quadratic form stays below 5% near equality",
                             0.05, rel));
  }

  // Quadratic discount law: MC vs analytic, and the gamma vs gamma^2 ordering.
  {
    ShockSchedule schedule{0.9, std::vector<double>(50, 1.0)};
    Rng mc = rng.stream(11);
    const auto report = discounted_shock_variance(schedule, 1000000, mc);
    const double closed = (1.0 - std::pow(0.81, 50)) / (1.0 - 0.81);
    out.push_back(make_check("quadratic-discount-analytic",
                             "analytic variance matches the geometric closed form", 1e-9,
                             std::abs(report.analytic - closed)));
    out.push_back(make_check("quadratic-discount-monte-carlo",
                             "1e6-sample variance falls within 3 CI halfwidths of analytic",
                             3.0 * report.ci_halfwidth, std::abs(report.monte_carlo - report.analytic)));
    double plain = 0.0;
    double w = 1.0;
    for (int t = 0; t < 50; ++t) {
      plain += w;
      w *= 0.9;
    }
    out.push_back(make_check("quadratic-discount-dominance",
                             "sum (gamma^2)^t sigma^2 < sum gamma^t sigma^2 for gamma in (0,1)",
                             -1e-9, report.analytic - plain));
  }

  // Fisher surrogate in the conjugate Gaussian-mean model.
  {
    Rng mc = rng.stream(12);
    const auto report = fisher_surrogate_check({1.0, 1.0, 0.3}, 20, 100000, mc);
    const double rel = std::abs(report.mean_kl_gain - report.surrogate) / report.surrogate;
    out.push_back(make_check("fisher-surrogate",
                             "MC expected KL gain within 5% of the half-trace surrogate "
                             "(conjugate model, n_obs 20)",
                             0.05, rel));
    Rng mc0 = rng.stream(13);
    const auto fresh = fisher_surrogate_check({1.0, 1.0, 0.3}, 0, 200000, mc0);
    out.push_back(make_check("fisher-surrogate-prior-point",
                             "surrogate equals 0.5 at tau^2 = sigma^2 = 1 with no observations",
                             1e-12, std::abs(fresh.surrogate - 0.5)));
    out.push_back(make_check("fisher-mc-vs-closed-form",
                             "MC KL gain matches 0.5 ln(1 + v/sigma^2) within 5%", 0.05,
                             std::abs(fresh.mean_kl_gain - fresh.analytic_gain) /
                                 fresh.analytic_gain));
  }

  return out;
}

std::vector<CheckResult> verify_sampler() {
  std::vector<CheckResult> out;
  Rng rng(0x77aa01d3ull);

  // Island speedup nu = 1/epsilon, plus the second-moment variance-ratio route.
  {
    double worst_nu = 0.0;
    double worst_ratio = 0.0;
    for (double eps : {0.5, 0.1, 0.01}) {
      const auto island = island_densities(eps, 10, 5);
      const auto speedup = chi2_speedup(island.q_star, island.q_traj);
      worst_nu = std::max(worst_nu, std::abs(speedup.nu - 1.0 / eps));
      Rng none(0);
      const auto under_traj = estimator_variance(island.q_traj, island.indicator_b,
                                                 island.q_traj, 0, none);
      const auto under_star =
          estimator_variance(island.q_traj, island.indicator_b, island.q_star, 0, none);
      const double ratio =
          under_traj.analytic_second_moment / under_star.analytic_second_moment;
      worst_ratio = std::max(worst_ratio, std::abs(ratio - speedup.nu));
    }
    out.push_back(make_check("island-speedup",
                             "nu = 1 + chi2(q*||q_traj) equals 1/epsilon on island densities",
                             1e-10, worst_nu));
    out.push_back(make_check("island-variance-ratio",
                             "second-moment ratio sigma^2_traj / sigma^2_q* equals nu", 1e-9,
                             worst_ratio));
  }

  // Zero-variance optimum and dominance of perturbed proposals.
  {
    FiniteDensity rho = FiniteDensity::uniform(6);
    std::vector<double> g(6);
    for (auto& v : g) v = 0.1 + rng.next_double();
    const FiniteDensity q_star = optimal_proposal(rho, g);
    Rng none(0);
    const auto at_opt = estimator_variance(rho, g, q_star, 0, none);
    out.push_back(make_check("optimal-proposal-zero-variance",
                             "q* gives a zero-variance estimator for non-negative integrands",
                             1e-12, at_opt.analytic_variance));
    double min_perturbed = std::numeric_limits<double>::infinity();
    for (int p = 0; p < 20; ++p) {
      std::vector<double> weights(6);
      for (std::size_t s = 0; s < 6; ++s)
        weights[s] = q_star.mass[s] * std::exp(0.5 * (2.0 * rng.next_double() - 1.0));
      const FiniteDensity q_pert = FiniteDensity::normalized(std::move(weights));
      const auto report = estimator_variance(rho, g, q_pert, 0, none);
      min_perturbed = std::min(min_perturbed, report.analytic_variance);
    }
    out.push_back(make_check("optimal-proposal-dominance",
                             "20 perturbed proposals all have strictly larger variance than q*",
                             1e-12, min_perturbed, /*pass_when_leq=*/false));
  }

  // Proposal shape is invariant to positive rescaling of the magnitude field.
  {
    FiniteDensity rho = FiniteDensity::normalized({0.3, 0.1, 0.2, 0.4});
    std::vector<double> mag{1.0, 1.0, 2.0, 4.0};
    std::vector<double> scaled{3.7, 3.7, 7.4, 14.8};
    const auto a = optimal_proposal(rho, mag);
    const auto b = optimal_proposal(rho, scaled);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.mass.size(); ++i)
      worst = std::max(worst, std::abs(a.mass[i] - b.mass[i]));
    out.push_back(make_check("optimal-proposal-rescaling",
                             "q* is invariant to positive rescaling of the magnitude field",
                             1e-14, worst));
  }

  return out;
}

std::vector<CheckResult> verify_topology() {
  std::vector<CheckResult> out;
  Rng rng(0xc3e11909ull);

  // Two-state closed forms.
  {
    const double p = 0.3;
    const ChainView chain =
        chain_from_kernel({1.0 - p, p, p, 1.0 - p}, 2);
    const auto spectral = spectral_gap(chain);
    const double phi = conductance(chain, {0});
    out.push_back(make_check("two-state-spectral-gap", "flip-p chain has gap 2p", 1e-8,
                             std::abs(spectral.gap - 2.0 * p)));
    out.push_back(make_check("two-state-conductance", "flip-p chain has conductance p", 1e-12,
                             std::abs(phi - p)));
  }

  // Power iteration against a dense eigensolve oracle on random reversible chains.
  {
    double worst = 0.0;
    for (int m = 0; m < 5; ++m) {
      const int n = 4 + static_cast<int>(rng.next_index(13));
      std::vector<double> weights(static_cast<std::size_t>(n) * n, 0.0);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          const double w = 0.05 + rng.next_double();
          weights[static_cast<std::size_t>(i) * n + j] = w;
          weights[static_cast<std::size_t>(j) * n + i] = w;
        }
      std::vector<double> kernel(weights);
      for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += kernel[static_cast<std::size_t>(i) * n + j];
        for (int j = 0; j < n; ++j) kernel[static_cast<std::size_t>(i) * n + j] /= sum;
        double acc = 0.0;
        for (int j = 0; j < n - 1; ++j) acc += kernel[static_cast<std::size_t>(i) * n + j];
        kernel[static_cast<std::size_t>(i) * n + (n - 1)] = 1.0 - acc;
      }
      const ChainView chain = chain_from_kernel(kernel, n);
      const auto spectral = spectral_gap(chain, 1e-10);
      Eigen::MatrixXd dense(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dense(i, j) = chain.k(i, j);
      const Eigen::EigenSolver<Eigen::MatrixXd> solver(dense);
      std::vector<double> magnitudes;
      for (int i = 0; i < n; ++i) magnitudes.push_back(std::abs(solver.eigenvalues()[i]));
      std::sort(magnitudes.rbegin(), magnitudes.rend());
      worst = std::max(worst, std::abs(spectral.lambda2_mag - magnitudes[1]));
    }
    out.push_back(make_check("spectral-gap-dense-oracle",
                             "power iteration matches a dense eigensolve on reversible chains",
                             1e-6, worst));
  }

  // Cheeger sandwich on lazy reversible suite chains.
  {
    double worst = -1.0;
    auto run_sandwich = [&](const ChainView& base, const std::vector<std::vector<int>>& cuts) {
      const ChainView lazy = make_lazy(base);
      const double phi = min_conductance(lazy, cuts);
      const auto spectral = spectral_gap(lazy, 1e-10);
      worst = std::max(worst, phi * phi / 2.0 - spectral.gap);
      worst = std::max(worst, spectral.gap - 2.0 * phi);
    };
    {
      const double p = 0.3;
      run_sandwich(chain_from_kernel({1.0 - p, p, p, 1.0 - p}, 2), {{0}});
    }
    {
      const int n = 8;  // symmetric ring walk, cuts = contiguous arcs
      std::vector<double> kernel(static_cast<std::size_t>(n) * n, 0.0);
      for (int i = 0; i < n; ++i) {
        kernel[static_cast<std::size_t>(i) * n + (i + 1) % n] = 0.5;
        kernel[static_cast<std::size_t>(i) * n + (i + n - 1) % n] = 0.5;
      }
      std::vector<std::vector<int>> cuts;
      for (int len = 1; len <= n / 2; ++len) {
        std::vector<int> arc;
        for (int i = 0; i < len; ++i) arc.push_back(i);
        cuts.push_back(arc);
      }
      run_sandwich(chain_from_kernel(kernel, n), cuts);
    }
    for (int corridor : {1, 2, 4}) {
      const BottleneckGrid grid = build_bottleneck_grid(4, 4, corridor);
      const ChainView chain = chain_from_policy(grid.mdp, uniform_policy(grid.mdp));
      std::vector<std::vector<int>> cuts;
      for (int col = 0; col < grid.total_cols - 1; ++col) {
        std::vector<int> cut;
        for (int s = 0; s < grid.mdp.n_states; ++s)
          if (grid.col_of(s) <= col) cut.push_back(s);
        if (!cut.empty() && cut.size() < static_cast<std::size_t>(grid.mdp.n_states))
          cuts.push_back(cut);
      }
      run_sandwich(chain, cuts);
    }
    out.push_back(make_check("cheeger-sandwich",
                             "phi^2/2 <= spectral gap <= 2 phi on lazy reversible suite chains",
                             1e-12, worst));
  }

  // Conductance is strictly monotone in corridor width.
  {
    double prev = -1.0;
    double worst = -1.0;
    for (int corridor : {1, 2, 4, 8}) {
      const BottleneckGrid grid = build_bottleneck_grid(8, 8, corridor);
      const ChainView chain = chain_from_policy(grid.mdp, uniform_policy(grid.mdp));
      std::vector<int> cut;
      for (int s = 0; s < grid.mdp.n_states; ++s)
        if (grid.col_of(s) <= grid.width - 1) cut.push_back(s);
      const double phi = conductance(chain, cut);
      if (prev >= 0.0) worst = std::max(worst, prev - phi);
      prev = phi;
    }
    out.push_back(make_check("bottleneck-conductance-monotone",
                             "wall conductance strictly increases with corridor width", -1e-12,
                             worst));
  }

  // Hitting-time scaling across the corridor family: decreasing in phi with a
  // log-log slope in [-2.5, -1.0].
  {
    std::vector<double> log_phi;
    std::vector<double> log_median;
    bool decreasing = true;
    double prev_median = std::numeric_limits<double>::infinity();
    for (int corridor : {1, 2, 4, 8}) {
      const BottleneckGrid grid = build_bottleneck_grid(8, 8, corridor);
      const PolicyMatrix uniform = uniform_policy(grid.mdp);
      const ChainView chain = chain_from_policy(grid.mdp, uniform);
      std::vector<int> cut;
      for (int s = 0; s < grid.mdp.n_states; ++s)
        if (grid.col_of(s) <= grid.width - 1) cut.push_back(s);
      const double phi = conductance(chain, cut);
      FiniteDensity start;
      start.mass.assign(static_cast<std::size_t>(grid.mdp.n_states), 0.0);
      start.mass[static_cast<std::size_t>(grid.state_at(grid.height / 2, 0))] = 1.0;
      std::vector<char> target(static_cast<std::size_t>(grid.mdp.n_states), 0);
      for (int s : grid.right_room()) target[static_cast<std::size_t>(s)] = 1;
      Rng mc = rng.stream(1000 + corridor);
      const auto report =
          hitting_time_mc(grid.mdp, uniform, start, target, 1000000, 200, mc);
      if (report.median_steps >= prev_median) decreasing = false;
      prev_median = report.median_steps;
      log_phi.push_back(std::log(phi));
      log_median.push_back(std::log(report.median_steps));
    }
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < log_phi.size(); ++i) {
      mean_x += log_phi[i];
      mean_y += log_median[i];
    }
    mean_x /= static_cast<double>(log_phi.size());
    mean_y /= static_cast<double>(log_phi.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < log_phi.size(); ++i) {
      sxy += (log_phi[i] - mean_x) * (log_median[i] - mean_y);
      sxx += (log_phi[i] - mean_x) * (log_phi[i] - mean_x);
    }
    const double slope = sxy / sxx;
    out.push_back(make_check("hitting-time-monotone",
                             "median hitting time strictly decreases as conductance grows", 1.0,
                             decreasing ? 0.0 : 2.0));
    const bool slope_ok = slope >= -2.5 && slope <= -1.0;
    out.push_back(make_check("hitting-time-slope",
                             "log-log slope of median hitting time vs conductance in [-2.5,-1]",
                             0.0, slope, /*pass_when_leq=*/false));
    out.back().passed = slope_ok;
  }

  // Island hitting times scale like 1/epsilon.
  {
    auto median_hit = [&](double eps, int salt) {
      const IslandEnv env = build_island_mdp({eps, 10, 5});
      const PolicyMatrix uniform = uniform_policy(env.mdp);
      FiniteDensity start;
      start.mass.assign(static_cast<std::size_t>(env.mdp.n_states), 0.0);
      start.mass[0] = 1.0;
      Rng mc = rng.stream(static_cast<std::uint64_t>(2000 + salt));
      return hitting_time_mc(env.mdp, uniform, start, env.goal_region(), 1000000, 200, mc)
          .median_steps;
    };
    const double ratio = median_hit(0.01, 1) / median_hit(0.1, 2);
    const bool in_band = ratio >= 5.0 && ratio <= 20.0;
    out.push_back(make_check("island-hitting-scaling",
                             "median hitting time grows ~10x when epsilon shrinks 10x "
                             "(band 5x-20x)",
                             0.0, ratio, /*pass_when_leq=*/false));
    out.back().passed = in_band;
  }

  // Jump-initialized starts never hit later than trajectory-bound starts.
  {
    double worst = -std::numeric_limits<double>::infinity();
    auto compare = [&](const TabularMdp& mdp, const std::vector<char>& target,
                       const FiniteDensity& jump_start, const FiniteDensity& traj_start,
                       int salt) {
      const PolicyMatrix uniform = uniform_policy(mdp);
      Rng mc_jump = rng.stream(static_cast<std::uint64_t>(3000 + salt));
      Rng mc_traj = rng.stream(static_cast<std::uint64_t>(4000 + salt));
      const auto jump = hitting_time_mc(mdp, uniform, jump_start, target, 1000000, 60, mc_jump);
      const auto traj = hitting_time_mc(mdp, uniform, traj_start, target, 1000000, 60, mc_traj);
      worst = std::max(worst, jump.median_steps - traj.median_steps);
    };
    {
      const IslandEnv env = build_island_mdp({0.05, 10, 5});
      FiniteDensity jump;
      jump.mass.assign(static_cast<std::size_t>(env.mdp.n_states), 0.0);
      jump.mass[static_cast<std::size_t>(env.bridge_state)] = 1.0;
      std::vector<double> occupancy(static_cast<std::size_t>(env.mdp.n_states), 0.0);
      for (int s : env.region_a) occupancy[static_cast<std::size_t>(s)] = 1.0;
      compare(env.mdp, env.goal_region(), jump, FiniteDensity::normalized(occupancy), 1);
    }
    {
      const BottleneckGrid grid = build_bottleneck_grid(6, 6, 1);
      FiniteDensity jump;
      jump.mass.assign(static_cast<std::size_t>(grid.mdp.n_states), 0.0);
      jump.mass[static_cast<std::size_t>(grid.state_at(grid.height / 2, grid.width))] = 1.0;
      std::vector<double> left(static_cast<std::size_t>(grid.mdp.n_states), 0.0);
      for (int s : grid.left_room()) left[static_cast<std::size_t>(s)] = 1.0;
      std::vector<char> target(static_cast<std::size_t>(grid.mdp.n_states), 0);
      for (int s : grid.right_room()) target[static_cast<std::size_t>(s)] = 1;
      compare(grid.mdp, target, jump, FiniteDensity::normalized(left), 2);
    }
    out.push_back(make_check("jump-initialization-dominance",
                             "jump-initialized median hitting time <= trajectory-bound median",
                             0.0, worst));
  }

  return out;
}

std::vector<CheckResult> run_verify_suite(const std::string& suite) {
  std::vector<CheckResult> out;
  auto append = [&](std::vector<CheckResult> extra) {
    for (auto& check : extra) out.push_back(std::move(check));
  };
  if (suite == "potentials" || suite == "all") append(verify_potentials());
  if (suite == "efe" || suite == "all") append(verify_efe());
  if (suite == "sampler" || suite == "all") append(verify_sampler());
  if (suite == "topology" || suite == "all") append(verify_topology());
  if (out.empty())
    throw ValidationError("verify: unknown suite " + suite +
                          " (all|potentials|efe|sampler|topology)");
  return out;
}

int print_check_results(const std::vector<CheckResult>& results) {
  int failures = 0;
  std::printf("%-34s %-10s %-14s %-14s %s\n", "check", "status", "measured", "tolerance",
              "property");
  for (const auto& check : results) {
    if (!check.passed) ++failures;
    std::printf("%-34s %-10s %-14.6g %-14.6g %s\n", check.id.c_str(),
                check.passed ? "pass" : "FAIL", check.measured, check.tolerance,
                check.property.c_str());
  }
  std::printf("%zu checks, %d failed\n", results.size(), failures);
  return failures;
}

}  // namespace md
