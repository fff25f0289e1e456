#include "minddreamer/sampler.hpp"

#include <cmath>
#include <limits>

#include "minddreamer/errors.hpp"

namespace md {

void FiniteDensity::validate() const {
  if (mass.empty()) throw ValidationError("FiniteDensity: empty support");
  double sum = 0.0;
  for (double v : mass) {
    if (v < 0.0 || !std::isfinite(v))
      throw ValidationError("FiniteDensity: entries must be finite and >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("FiniteDensity: not normalized");
}

FiniteDensity FiniteDensity::uniform(std::size_t n) {
  if (n == 0) throw ValidationError("FiniteDensity: empty support");
  return {std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

FiniteDensity FiniteDensity::normalized(std::vector<double> weights) {
  double sum = 0.0;
  for (double v : weights) {
    if (v < 0.0 || !std::isfinite(v))
      throw ValidationError("FiniteDensity: weights must be finite and >= 0");
    sum += v;
  }
  if (!(sum > 0.0)) throw ValidationError("FiniteDensity: weights sum to zero");
  for (double& v : weights) v /= sum;
  return {std::move(weights)};
}

FiniteDensity optimal_proposal(const FiniteDensity& rho, const std::vector<double>& magnitude) {
  rho.validate();
  if (magnitude.size() != rho.support())
    throw ValidationError("optimal_proposal: magnitude size mismatch");
  std::vector<double> weights(rho.support());
  for (std::size_t s = 0; s < weights.size(); ++s) {
    if (magnitude[s] < 0.0)
      throw ValidationError("optimal_proposal: magnitude must be non-negative");
    weights[s] = rho.mass[s] * magnitude[s];
  }
  return FiniteDensity::normalized(std::move(weights));
}

EstimatorReport estimator_variance(const FiniteDensity& rho, const std::vector<double>& integrand,
                                   const FiniteDensity& proposal, long mc_samples, Rng& rng) {
  rho.validate();
  proposal.validate();
  if (integrand.size() != rho.support() || proposal.support() != rho.support())
    throw ValidationError("estimator_variance: size mismatch");

  EstimatorReport out;
  for (std::size_t s = 0; s < rho.support(); ++s) {
    const double h = rho.mass[s] * integrand[s];
    out.target += h;
    if (h == 0.0) continue;
    if (proposal.mass[s] <= 0.0)
      throw ValidationError("estimator_variance: proposal lacks support, variance is infinite");
    out.analytic_second_moment += h * h / proposal.mass[s];
  }
  out.analytic_variance = out.analytic_second_moment - out.target * out.target;

  if (mc_samples > 0) {
    double sum = 0.0, sum_sq = 0.0;
    for (long i = 0; i < mc_samples; ++i) {
      const std::size_t s = rng.sample(proposal.mass);
      const double x = rho.mass[s] * integrand[s] / proposal.mass[s];
      sum += x;
      sum_sq += x * x;
    }
    const double inv_n = 1.0 / static_cast<double>(mc_samples);
    out.estimate_mean = sum * inv_n;
    if (mc_samples > 1) {
      const double m2 = sum_sq * inv_n - out.estimate_mean * out.estimate_mean;
      out.estimate_variance =
          std::max(0.0, m2) * static_cast<double>(mc_samples) / static_cast<double>(mc_samples - 1);
    }
  }
  out.samples = mc_samples;
  return out;
}

Chi2Result chi2_speedup(const FiniteDensity& q_star, const FiniteDensity& q_traj) {
  q_star.validate();
  q_traj.validate();
  if (q_star.support() != q_traj.support())
    throw ValidationError("chi2_speedup: support size mismatch");
  double chi2 = 0.0;
  for (std::size_t s = 0; s < q_star.support(); ++s) {
    if (q_traj.mass[s] <= 0.0) {
      if (q_star.mass[s] > 0.0) {
        chi2 = std::numeric_limits<double>::infinity();
        break;
      }
      continue;
    }
    const double ratio = q_star.mass[s] / q_traj.mass[s] - 1.0;
    chi2 += q_traj.mass[s] * ratio * ratio;
  }
  return {chi2, 1.0 + chi2};
}

IslandDensities island_densities(double epsilon, int size_a, int size_b) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw ValidationError("island_densities: epsilon must lie in (0,1]");
  if (size_a < 1 || size_b < 1) throw ValidationError("island_densities: sizes must be >= 1");
  const std::size_t n = static_cast<std::size_t>(size_a + size_b);
  IslandDensities out;
  out.q_star.mass.assign(n, 0.0);
  out.q_traj.mass.assign(n, 0.0);
  out.indicator_b.assign(n, 0.0);
  for (int s = 0; s < size_a; ++s)
    out.q_traj.mass[static_cast<std::size_t>(s)] = (1.0 - epsilon) / size_a;
  for (int s = size_a; s < size_a + size_b; ++s) {
    const auto i = static_cast<std::size_t>(s);
    out.q_star.mass[i] = 1.0 / size_b;
    out.q_traj.mass[i] = epsilon / size_b;
    out.indicator_b[i] = 1.0;
  }
  return out;
}

}  // namespace md
