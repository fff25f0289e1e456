#pragma once

#include <vector>

#include "minddreamer/mdp.hpp"
#include "minddreamer/sampler.hpp"

namespace md {

// Markov chain induced by an MDP and a policy, with its stationary distribution.
struct ChainView {
  int n = 0;
  std::vector<double> kernel;      // row-stochastic, [s * n + s2]
  std::vector<double> stationary;  // left fixed point, power-iterated to 1e-10

  double k(int s, int s2) const { return kernel[static_cast<std::size_t>(s) * n + s2]; }
  double& k(int s, int s2) { return kernel[static_cast<std::size_t>(s) * n + s2]; }
};

ChainView chain_from_policy(const TabularMdp& mdp, const PolicyMatrix& policy);
ChainView chain_from_kernel(std::vector<double> kernel, int n);

// Half self-loop mix; kills periodicity before spectral analysis.
ChainView make_lazy(const ChainView& chain);

// Conductance of a cut: Phi(S) = Q(S, S^c) / min(pi(S), pi(S^c)) with Q the
// stationary edge flow. The cut must be a proper nonempty subset.
double conductance(const ChainView& chain, const std::vector<int>& cut);
double min_conductance(const ChainView& chain, const std::vector<std::vector<int>>& cuts);

struct SpectralResult {
  double gap = 0.0;          // 1 - |lambda_2|
  double lambda2_mag = 0.0;  // |lambda_2|
  bool irreducible = false;
  bool aperiodic = false;
  bool reversible = false;
};

// Second eigenvalue magnitude by power iteration with deflation of the known
// top eigenpair; reducible or periodic chains return gap 0 with flags set.
SpectralResult spectral_gap(const ChainView& chain, double tol = 1e-8);

struct HittingTimeReport {
  double median_steps = 0.0;
  double iqr = 0.0;
  int seeds = 0;
  int censored = 0;  // runs that never hit within max_steps, recorded at max_steps
  std::vector<double> samples;
};

// First-hitting statistics of `target` under the policy, over `seeds`
// independent seeded walks started from start_dist.
HittingTimeReport hitting_time_mc(const TabularMdp& mdp, const PolicyMatrix& policy,
                                  const FiniteDensity& start_dist,
                                  const std::vector<char>& target, long max_steps, int seeds,
                                  Rng& rng);

}  // namespace md
