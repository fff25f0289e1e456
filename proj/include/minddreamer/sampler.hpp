#pragma once

#include <vector>

#include "minddreamer/rng.hpp"

namespace md {

// Probability vector over a finite support.
struct FiniteDensity {
  std::vector<double> mass;

  std::size_t support() const { return mass.size(); }
  void validate() const;
  static FiniteDensity uniform(std::size_t n);
  static FiniteDensity normalized(std::vector<double> weights);
};

// Minimum-variance proposal q*(s) proportional to rho(s) * magnitude(s).
// The magnitude field is caller-supplied: |G(s)| for the statistical form,
// a gradient norm for the optimization form.
FiniteDensity optimal_proposal(const FiniteDensity& rho, const std::vector<double>& magnitude);

struct EstimatorReport {
  double target = 0.0;                  // sum_s rho(s) g(s)
  double analytic_variance = 0.0;       // sum (rho g)^2 / q - target^2
  double analytic_second_moment = 0.0;  // sum (rho g)^2 / q
  double estimate_mean = 0.0;           // Monte Carlo mean of the weighted draws
  double estimate_variance = 0.0;       // Monte Carlo sample variance
  long samples = 0;
};

// Importance-sampling estimator of sum rho * g under `proposal`; throws on a
// support violation (rho * g nonzero where the proposal has no mass).
EstimatorReport estimator_variance(const FiniteDensity& rho, const std::vector<double>& integrand,
                                   const FiniteDensity& proposal, long mc_samples, Rng& rng);

struct Chi2Result {
  double chi2 = 0.0;
  double nu = 0.0;  // 1 + chi2
};

// Pearson chi-square divergence chi2(q_star || q_traj) and the speedup
// nu = 1 + chi2. Mass of q_star outside the support of q_traj yields +infinity.
Chi2Result chi2_speedup(const FiniteDensity& q_star, const FiniteDensity& q_traj);

// The two-region densities of the island construction: q* uniform on B, zero
// on A; q_traj carries epsilon mass on B and the rest uniformly on A.
struct IslandDensities {
  FiniteDensity q_star;
  FiniteDensity q_traj;
  std::vector<double> indicator_b;  // 1 on region B; a non-negative integrand
};

IslandDensities island_densities(double epsilon, int size_a, int size_b);

}  // namespace md
