#include "minddreamer/efe.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "minddreamer/errors.hpp"

namespace md {

namespace {
constexpr double kNormTol = 1e-12;

void check_density(const std::vector<double>& p, const char* who, bool strictly_positive) {
  double sum = 0.0;
  for (double v : p) {
    if (v < 0.0 || !std::isfinite(v))
      throw ValidationError(std::string(who) + ": entries must be finite and >= 0");
    if (strictly_positive && v <= 0.0)
      throw ValidationError(std::string(who) + ": entries must be strictly positive");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kNormTol)
    throw ValidationError(std::string(who) + ": not normalized");
}
}  // namespace

void DiscreteJointModel::validate() const {
  if (prior_s.empty() || preference.empty() || likelihood.size() != prior_s.size())
    throw ValidationError("DiscreteJointModel: inconsistent shapes");
  check_density(prior_s, "DiscreteJointModel prior", false);
  check_density(preference, "DiscreteJointModel preference", true);
  for (const auto& row : likelihood) {
    if (row.size() != preference.size())
      throw ValidationError("DiscreteJointModel: likelihood row size mismatch");
    check_density(row, "DiscreteJointModel likelihood", false);
  }
}

EfeDecomposition efe_decompose(const DiscreteJointModel& model) {
  model.validate();
  const std::size_t ns = model.prior_s.size();
  const std::size_t no = model.preference.size();

  std::vector<double> marginal_o(no, 0.0);
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t o = 0; o < no; ++o) marginal_o[o] += model.prior_s[s] * model.likelihood[s][o];

  double mutual = 0.0;
  double pragmatic = 0.0;
  double direct = 0.0;  // E[ln q(s) - ln p(s,o)] with p(s,o) = p(s|o) p(o|C)
  for (std::size_t o = 0; o < no; ++o) {
    if (marginal_o[o] > 0.0) pragmatic += marginal_o[o] * std::log(model.preference[o]);
    for (std::size_t s = 0; s < ns; ++s) {
      const double joint = model.prior_s[s] * model.likelihood[s][o];
      if (joint <= 0.0) continue;
      mutual += joint * std::log(joint / (model.prior_s[s] * marginal_o[o]));
      const double posterior = joint / marginal_o[o];  // ideal inference p(s|o)
      direct += joint * (std::log(model.prior_s[s]) -
                         std::log(posterior * model.preference[o]));
    }
  }

  // G comes from the definitional route; the epistemic/pragmatic split is
  // summed independently, so G + epistemic + pragmatic checks the identity.
  EfeDecomposition out;
  out.epistemic = mutual;
  out.pragmatic = pragmatic;
  out.g = direct;
  out.identity_residual = std::abs(out.g + mutual + pragmatic);
  return out;
}

namespace {

// E_{d0, pi}[ sum_t gamma^t f(s_t, a_t) ] by a dense linear solve.
double discounted_policy_value(const TabularMdp& mdp, const PolicyMatrix& policy,
                               const std::vector<double>& f_sa,
                               const std::vector<double>& start_dist) {
  const int n = mdp.n_states;
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd rhs(n);
  for (int s = 0; s < n; ++s) {
    double f_s = 0.0;
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double w = policy.at(s, a);
      if (w == 0.0) continue;
      f_s += w * f_sa[static_cast<std::size_t>(s) * mdp.n_actions + a];
      for (int s2 = 0; s2 < n; ++s2) system(s, s2) -= mdp.gamma * w * mdp.p(s, a, s2);
    }
    rhs(s) = f_s;
  }
  const Eigen::VectorXd v = system.partialPivLu().solve(rhs);
  double total = 0.0;
  for (int s = 0; s < n; ++s) total += start_dist[static_cast<std::size_t>(s)] * v(s);
  return total;
}

}  // namespace

double maxent_gap(const TabularMdp& mdp, const PolicyMatrix& policy, double alpha,
                  const std::vector<double>& start_dist) {
  if (!(alpha > 0.0)) throw ValidationError("maxent_gap: alpha must be positive");
  policy.validate();
  const int n = mdp.n_states;
  const int na = mdp.n_actions;
  std::vector<double> state_reward(static_cast<std::size_t>(n), 0.0);
  for (int s = 0; s < n; ++s) {
    const double r0 = mdp.r(s, 0);
    for (int a = 1; a < na; ++a)
      if (std::abs(mdp.r(s, a) - r0) > kNormTol)
        throw ValidationError("maxent_gap: rewards must be action-independent");
    state_reward[static_cast<std::size_t>(s)] = r0;
  }

  double z = 0.0;
  for (int s = 0; s < n; ++s) z += std::exp(state_reward[static_cast<std::size_t>(s)] / alpha);
  const double log_z = std::log(z);

  // Free-energy objective with the epistemic term zeroed: per-step cost
  // ln pi(a|s) - ln p(o = s) where p(o) = exp(r/alpha)/Z.
  std::vector<double> f_efe(static_cast<std::size_t>(n) * na, 0.0);
  std::vector<double> f_maxent(f_efe.size(), 0.0);
  for (int s = 0; s < n; ++s)
    for (int a = 0; a < na; ++a) {
      const double pi_sa = policy.at(s, a);
      const double log_pi = pi_sa > 0.0 ? std::log(pi_sa) : 0.0;  // zero-weight terms drop out
      const double r = state_reward[static_cast<std::size_t>(s)];
      f_efe[static_cast<std::size_t>(s) * na + a] = log_pi - r / alpha + log_z;
      f_maxent[static_cast<std::size_t>(s) * na + a] = r - alpha * log_pi;
    }

  const double j_efe = discounted_policy_value(mdp, policy, f_efe, start_dist);
  const double j_maxent = discounted_policy_value(mdp, policy, f_maxent, start_dist);
  return alpha * j_efe + j_maxent;  // equals alpha * ln Z / (1 - gamma) for every policy
}

void GaussianBelief::validate() const {
  if (!(variance > 0.0)) throw ValidationError("GaussianBelief: variance must be positive");
}

KlPair gaussian_kl_pair(const GaussianBelief& q, const GaussianBelief& p) {
  q.validate();
  p.validate();
  const double dm = q.mean - p.mean;
  KlPair out;
  out.exact = std::log(std::sqrt(p.variance / q.variance)) +
              (q.variance + dm * dm) / (2.0 * p.variance) - 0.5;
  out.second_order = dm * dm / (2.0 * p.variance);
  return out;
}

void ShockSchedule::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw ValidationError("ShockSchedule: gamma must lie in [0,1)");
  for (double v : variances)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ValidationError("ShockSchedule: variances must be finite and >= 0");
}

VarianceReport discounted_shock_variance(const ShockSchedule& schedule, long mc_samples,
                                         Rng& rng) {
  schedule.validate();
  if (mc_samples < 10000)
    throw ValidationError("discounted_shock_variance: need at least 1e4 samples");

  VarianceReport out;
  double weight = 1.0;
  for (double v : schedule.variances) {
    out.analytic += weight * v;
    weight *= schedule.gamma * schedule.gamma;
  }

  std::vector<double> sigmas(schedule.variances.size());
  for (std::size_t t = 0; t < sigmas.size(); ++t) sigmas[t] = std::sqrt(schedule.variances[t]);

  double sum = 0.0, sum_sq = 0.0, sum_q = 0.0;
  for (long i = 0; i < mc_samples; ++i) {
    double x = 0.0;
    double g = 1.0;
    for (std::size_t t = 0; t < sigmas.size(); ++t) {
      x += g * sigmas[t] * rng.next_gaussian();
      g *= schedule.gamma;
    }
    sum += x;
    sum_sq += x * x;
    sum_q += x * x * x * x;
  }
  const double inv_n = 1.0 / static_cast<double>(mc_samples);
  const double mean = sum * inv_n;
  const double m2 = sum_sq * inv_n - mean * mean;
  out.monte_carlo = m2 * static_cast<double>(mc_samples) / static_cast<double>(mc_samples - 1);
  // Standard error of the sample variance from the fourth central moment.
  const double m4 = sum_q * inv_n - 4.0 * mean * (sum * inv_n) * m2 - mean * mean * mean * mean;
  const double var_of_var = std::max(0.0, (m4 - m2 * m2) * inv_n);
  out.ci_halfwidth = std::sqrt(var_of_var);
  return out;
}

void GaussianLinearModel::validate() const {
  if (!(prior_variance > 0.0) || !(noise_variance > 0.0))
    throw ValidationError("GaussianLinearModel: variances must be positive");
}

FisherReport fisher_surrogate_check(const GaussianLinearModel& model, int n_obs,
                                    long mc_samples, Rng& rng) {
  model.validate();
  if (n_obs < 0) throw ValidationError("fisher_surrogate_check: n_obs must be >= 0");
  if (mc_samples < 1) throw ValidationError("fisher_surrogate_check: need samples");

  // Condition on n_obs draws from the generative model.
  double precision = 1.0 / model.prior_variance;
  double mean_times_precision = 0.0;
  const double noise_sd = std::sqrt(model.noise_variance);
  for (int i = 0; i < n_obs; ++i) {
    const double y = model.true_mean + noise_sd * rng.next_gaussian();
    precision += 1.0 / model.noise_variance;
    mean_times_precision += y / model.noise_variance;
  }
  const double post_var = 1.0 / precision;
  const double post_mean = post_var * mean_times_precision;

  FisherReport out;
  out.posterior_variance = post_var;
  out.surrogate = 0.5 * (1.0 / model.noise_variance) * post_var;
  out.analytic_gain = 0.5 * std::log1p(post_var / model.noise_variance);

  const double next_var = 1.0 / (precision + 1.0 / model.noise_variance);
  const double predictive_sd = std::sqrt(post_var + model.noise_variance);
  const GaussianBelief current{post_mean, post_var};
  double acc = 0.0;
  for (long i = 0; i < mc_samples; ++i) {
    const double y = post_mean + predictive_sd * rng.next_gaussian();
    const double next_mean = next_var * (post_mean / post_var + y / model.noise_variance);
    acc += gaussian_kl_pair({next_mean, next_var}, current).exact;
  }
  out.mean_kl_gain = acc / static_cast<double>(mc_samples);
  return out;
}

}  // namespace md
