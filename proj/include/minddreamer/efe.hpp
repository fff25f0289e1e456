#pragma once

#include <vector>

#include "minddreamer/mdp.hpp"
#include "minddreamer/rng.hpp"

namespace md {

// Discrete latent/observation model: prior q(s), likelihood p(o|s) and a
// strictly positive preference prior p(o|C).
struct DiscreteJointModel {
  std::vector<double> prior_s;
  std::vector<std::vector<double>> likelihood;  // rows indexed by s
  std::vector<double> preference;
  void validate() const;
};

struct EfeDecomposition {
  double g = 0.0;
  double epistemic = 0.0;  // mutual information I(s;o)
  double pragmatic = 0.0;  // E_{q(o)} ln p(o|C)
  // |G - E[ln q(s) - ln p(s,o)]| with p(s,o) = p(s|o) p(o|C) under ideal inference.
  double identity_residual = 0.0;
};

// G = -I(s;o) - E_{q(o)}[ln p(o|C)], with the joint q(s,o) = q(s) p(o|s).
EfeDecomposition efe_decompose(const DiscreteJointModel& model);

// Gap between the -alpha-scaled pragmatic free-energy objective and the
// maximum-entropy return, under the preference prior p(o) = exp(r(s)/alpha)/Z.
// The gap is policy-independent and equals alpha * ln Z / (1 - gamma).
// Requires action-independent rewards so that Z does not depend on the policy.
double maxent_gap(const TabularMdp& mdp, const PolicyMatrix& policy, double alpha,
                  const std::vector<double>& start_dist);

struct GaussianBelief {
  double mean = 0.0;
  double variance = 1.0;
  void validate() const;
};

struct KlPair {
  double exact = 0.0;
  double second_order = 0.0;  // (mu_q - mu_p)^2 / (2 sigma_p^2)
};

KlPair gaussian_kl_pair(const GaussianBelief& q, const GaussianBelief& p);

struct ShockSchedule {
  double gamma = 0.9;
  std::vector<double> variances;
  void validate() const;
};

struct VarianceReport {
  double analytic = 0.0;     // sum_t (gamma^2)^t sigma_t^2
  double monte_carlo = 0.0;  // sample variance of sum_t gamma^t eps_t
  double ci_halfwidth = 0.0;
};

VarianceReport discounted_shock_variance(const ShockSchedule& schedule, long mc_samples,
                                         Rng& rng);

// Conjugate Gaussian-mean model: theta ~ N(0, prior_variance) and
// observations y ~ N(theta, noise_variance).
struct GaussianLinearModel {
  double prior_variance = 1.0;
  double noise_variance = 1.0;
  double true_mean = 0.0;
  void validate() const;
};

struct FisherReport {
  double mean_kl_gain = 0.0;    // Monte Carlo estimate of E_y KL(posterior' || posterior)
  double surrogate = 0.0;       // (1 / (2 sigma^2)) * current posterior variance
  double analytic_gain = 0.0;   // closed form 0.5 * ln(1 + v / sigma^2)
  double posterior_variance = 0.0;
};

// Expected one-observation KL gain after conditioning on n_obs simulated draws,
// versus the half-trace Fisher surrogate; the next observation is drawn from
// the model's posterior predictive.
FisherReport fisher_surrogate_check(const GaussianLinearModel& model, int n_obs,
                                    long mc_samples, Rng& rng);

}  // namespace md
