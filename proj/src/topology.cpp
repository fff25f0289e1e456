#include "minddreamer/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "minddreamer/errors.hpp"

namespace md {

namespace {

std::vector<double> power_iterate_stationary(const std::vector<double>& kernel, int n) {
  std::vector<double> pi(static_cast<std::size_t>(n), 1.0 / n);
  std::vector<double> next(pi.size(), 0.0);
  for (int iter = 0; iter < 1000000; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < n; ++s) {
      const double w = pi[static_cast<std::size_t>(s)];
      if (w == 0.0) continue;
      for (int s2 = 0; s2 < n; ++s2)
        next[static_cast<std::size_t>(s2)] += w * kernel[static_cast<std::size_t>(s) * n + s2];
    }
    double diff = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) diff += std::abs(next[i] - pi[i]);
    pi.swap(next);
    if (diff < 1e-10) break;
  }
  double sum = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (double& v : pi) v /= sum;
  return pi;
}

bool strongly_connected(const ChainView& chain) {
  const int n = chain.n;
  auto reach = [&](bool forward) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    while (!frontier.empty()) {
      const int s = frontier.front();
      frontier.pop();
      for (int s2 = 0; s2 < n; ++s2) {
        const double w = forward ? chain.k(s, s2) : chain.k(s2, s);
        if (w > 0.0 && !seen[static_cast<std::size_t>(s2)]) {
          seen[static_cast<std::size_t>(s2)] = 1;
          frontier.push(s2);
        }
      }
    }
    return seen;
  };
  const auto fwd = reach(true);
  const auto bwd = reach(false);
  for (int s = 0; s < n; ++s)
    if (!fwd[static_cast<std::size_t>(s)] || !bwd[static_cast<std::size_t>(s)]) return false;
  return true;
}

// Period of a strongly connected chain: gcd over edges of level[u] + 1 - level[v].
int chain_period(const ChainView& chain) {
  const int n = chain.n;
  std::vector<int> level(static_cast<std::size_t>(n), -1);
  std::queue<int> frontier;
  frontier.push(0);
  level[0] = 0;
  int period = 0;
  while (!frontier.empty()) {
    const int s = frontier.front();
    frontier.pop();
    for (int s2 = 0; s2 < n; ++s2) {
      if (chain.k(s, s2) <= 0.0) continue;
      if (level[static_cast<std::size_t>(s2)] < 0) {
        level[static_cast<std::size_t>(s2)] = level[static_cast<std::size_t>(s)] + 1;
        frontier.push(s2);
      } else {
        const int loop = level[static_cast<std::size_t>(s)] + 1 - level[static_cast<std::size_t>(s2)];
        period = std::gcd(period, std::abs(loop));
      }
    }
  }
  return period == 0 ? 1 : period;
}

bool is_reversible(const ChainView& chain, double tol = 1e-10) {
  for (int s = 0; s < chain.n; ++s)
    for (int s2 = s + 1; s2 < chain.n; ++s2) {
      const double flow = chain.stationary[static_cast<std::size_t>(s)] * chain.k(s, s2);
      const double back = chain.stationary[static_cast<std::size_t>(s2)] * chain.k(s2, s);
      if (std::abs(flow - back) > tol) return false;
    }
  return true;
}

}  // namespace

ChainView chain_from_policy(const TabularMdp& mdp, const PolicyMatrix& policy) {
  policy.validate();
  ChainView chain;
  chain.n = mdp.n_states;
  chain.kernel.assign(static_cast<std::size_t>(chain.n) * chain.n, 0.0);
  for (int s = 0; s < chain.n; ++s)
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double w = policy.at(s, a);
      if (w == 0.0) continue;
      for (int s2 = 0; s2 < chain.n; ++s2) chain.k(s, s2) += w * mdp.p(s, a, s2);
    }
  chain.stationary = power_iterate_stationary(chain.kernel, chain.n);
  return chain;
}

ChainView chain_from_kernel(std::vector<double> kernel, int n) {
  if (kernel.size() != static_cast<std::size_t>(n) * n)
    throw ValidationError("chain_from_kernel: wrong size");
  for (int s = 0; s < n; ++s) {
    double sum = 0.0;
    for (int s2 = 0; s2 < n; ++s2) {
      const double v = kernel[static_cast<std::size_t>(s) * n + s2];
      if (v < 0.0) throw ValidationError("chain_from_kernel: negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw ValidationError("chain_from_kernel: row does not sum to 1");
  }
  ChainView chain;
  chain.n = n;
  chain.kernel = std::move(kernel);
  chain.stationary = power_iterate_stationary(chain.kernel, n);
  return chain;
}

ChainView make_lazy(const ChainView& chain) {
  ChainView lazy;
  lazy.n = chain.n;
  lazy.kernel.assign(chain.kernel.size(), 0.0);
  for (int s = 0; s < chain.n; ++s) {
    for (int s2 = 0; s2 < chain.n; ++s2) lazy.k(s, s2) = 0.5 * chain.k(s, s2);
    lazy.k(s, s) += 0.5;
  }
  lazy.stationary = chain.stationary;  // laziness preserves the stationary law
  return lazy;
}

double conductance(const ChainView& chain, const std::vector<int>& cut) {
  if (cut.empty() || cut.size() >= static_cast<std::size_t>(chain.n))
    throw ValidationError("conductance: cut must be a proper nonempty subset");
  std::vector<char> in_cut(static_cast<std::size_t>(chain.n), 0);
  for (int s : cut) {
    if (s < 0 || s >= chain.n) throw ValidationError("conductance: invalid state in cut");
    in_cut[static_cast<std::size_t>(s)] = 1;
  }
  double mass = 0.0;
  double flow = 0.0;
  for (int s = 0; s < chain.n; ++s) {
    if (!in_cut[static_cast<std::size_t>(s)]) continue;
    mass += chain.stationary[static_cast<std::size_t>(s)];
    for (int s2 = 0; s2 < chain.n; ++s2)
      if (!in_cut[static_cast<std::size_t>(s2)])
        flow += chain.stationary[static_cast<std::size_t>(s)] * chain.k(s, s2);
  }
  const double denom = std::min(mass, 1.0 - mass);
  if (denom <= 0.0) return 0.0;
  return flow / denom;
}

double min_conductance(const ChainView& chain, const std::vector<std::vector<int>>& cuts) {
  if (cuts.empty()) throw ValidationError("min_conductance: empty cut family");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& cut : cuts) best = std::min(best, conductance(chain, cut));
  return best;
}

SpectralResult spectral_gap(const ChainView& chain, double tol) {
  SpectralResult out;
  out.irreducible = strongly_connected(chain);
  out.aperiodic = out.irreducible && chain_period(chain) == 1;
  if (!out.irreducible || !out.aperiodic) {
    out.lambda2_mag = 1.0;
    return out;  // gap 0 with the flags telling why
  }
  out.reversible = is_reversible(chain);

  const int n = chain.n;
  const int max_iters = 200000;
  if (out.reversible) {
    // Symmetrize with sqrt(pi); the top eigenvector is then known exactly and
    // plain power iteration with deflation finds |lambda_2|.
    std::vector<double> sqrt_pi(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s)
      sqrt_pi[static_cast<std::size_t>(s)] =
          std::sqrt(std::max(chain.stationary[static_cast<std::size_t>(s)], 0.0));
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
          const double a_ij = sqrt_pi[static_cast<std::size_t>(i)] * chain.k(i, j) /
                              std::max(sqrt_pi[static_cast<std::size_t>(j)], 1e-300);
          acc += a_ij * x[static_cast<std::size_t>(j)];
        }
        y[static_cast<std::size_t>(i)] = acc;
      }
    };
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = 1.0 + 0.37 * ((i * 2654435761u) % 1000) / 1000.0;
    std::vector<double> y(x.size());
    auto deflate = [&](std::vector<double>& v) {
      double dot = 0.0, norm_sq = 0.0;
      for (int i = 0; i < n; ++i) {
        dot += v[static_cast<std::size_t>(i)] * sqrt_pi[static_cast<std::size_t>(i)];
        norm_sq += sqrt_pi[static_cast<std::size_t>(i)] * sqrt_pi[static_cast<std::size_t>(i)];
      }
      for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] -= dot / norm_sq * sqrt_pi[static_cast<std::size_t>(i)];
    };
    deflate(x);
    double lambda = 0.0;
    for (int iter = 0; iter < max_iters; ++iter) {
      apply(x, y);
      deflate(y);
      double norm = 0.0;
      for (double v : y) norm += v * v;
      norm = std::sqrt(norm);
      if (norm < 1e-14) {
        lambda = 0.0;  // deflated operator is (numerically) nilpotent
        break;
      }
      double rayleigh_num = 0.0, rayleigh_den = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        rayleigh_num += x[i] * y[i];
        rayleigh_den += x[i] * x[i];
      }
      const double estimate = std::abs(rayleigh_num / rayleigh_den);
      for (double& v : y) v /= norm;
      x.swap(y);
      if (iter > 2 && std::abs(estimate - lambda) < tol) {
        lambda = estimate;
        break;
      }
      lambda = estimate;
    }
    out.lambda2_mag = std::min(std::abs(lambda), 1.0);
  } else {
    // Non-reversible: deflate the known top pair (right 1, left pi) and track
    // the asymptotic growth rate, which converges to |lambda_2| (possibly a
    // complex pair, hence the windowed geometric mean).
    auto apply_deflated = [&](const std::vector<double>& x, std::vector<double>& y) {
      double pi_dot = 0.0;
      for (int i = 0; i < n; ++i)
        pi_dot += chain.stationary[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += chain.k(i, j) * x[static_cast<std::size_t>(j)];
        y[static_cast<std::size_t>(i)] = acc - pi_dot;
      }
    };
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = ((i * 40503u) % 997) / 997.0 - 0.5;
    std::vector<double> y(x.size());
    double log_growth = 0.0;
    int window = 0;
    double lambda = 0.0;
    double prev = -1.0;
    for (int iter = 0; iter < max_iters; ++iter) {
      apply_deflated(x, y);
      double norm = 0.0;
      for (double v : y) norm += v * v;
      norm = std::sqrt(norm);
      if (norm < 1e-14) {
        lambda = 0.0;
        break;
      }
      log_growth += std::log(norm);
      ++window;
      for (double& v : y) v /= norm;
      x.swap(y);
      if (window == 64) {
        lambda = std::exp(log_growth / window);
        if (prev >= 0.0 && std::abs(lambda - prev) < tol) break;
        prev = lambda;
        log_growth = 0.0;
        window = 0;
      }
    }
    out.lambda2_mag = std::min(lambda, 1.0);
  }
  out.gap = 1.0 - out.lambda2_mag;
  return out;
}

HittingTimeReport hitting_time_mc(const TabularMdp& mdp, const PolicyMatrix& policy,
                                  const FiniteDensity& start_dist,
                                  const std::vector<char>& target, long max_steps, int seeds,
                                  Rng& rng) {
  if (seeds < 1) throw ValidationError("hitting_time_mc: need at least one seed");
  if (target.size() != static_cast<std::size_t>(mdp.n_states))
    throw ValidationError("hitting_time_mc: target indicator size mismatch");
  start_dist.validate();

  HittingTimeReport report;
  report.seeds = seeds;
  report.samples.reserve(static_cast<std::size_t>(seeds));
  for (int seed = 0; seed < seeds; ++seed) {
    Rng walk = rng.stream(static_cast<std::uint64_t>(seed));
    int s = static_cast<int>(walk.sample(start_dist.mass));
    long steps = 0;
    while (!target[static_cast<std::size_t>(s)] && steps < max_steps) {
      const int a = static_cast<int>(walk.sample(policy.row(s)));
      s = static_cast<int>(walk.sample(mdp.row(s, a)));
      ++steps;
    }
    if (!target[static_cast<std::size_t>(s)]) ++report.censored;
    report.samples.push_back(static_cast<double>(steps));
  }

  std::vector<double> sorted = report.samples;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
  };
  report.median_steps = quantile(0.5);
  report.iqr = quantile(0.75) - quantile(0.25);
  return report;
}

}  // namespace md
