#include "minddreamer/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "minddreamer/errors.hpp"

namespace md {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double bellman_backup(const TabularMdp& mdp, const std::vector<double>& v, int s) {
  double best = kNegInf;
  for (int a = 0; a < mdp.n_actions; ++a) {
    double q = mdp.r(s, a);
    const auto row = mdp.row(s, a);
    for (int s2 = 0; s2 < mdp.n_states; ++s2) q += mdp.gamma * row[s2] * v[s2];
    best = std::max(best, q);
  }
  return best;
}

}  // namespace

void InfoField::validate() const {
  if (shocks.size() != static_cast<std::size_t>(n_states) * n_actions)
    throw ValidationError("InfoField: wrong size");
  for (double v : shocks)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ValidationError("InfoField: shocks must be finite and non-negative");
}

ValueField value_iteration(const TabularMdp& mdp, double tol) {
  if (!(tol > 0.0)) throw ValidationError("value_iteration: tol must be positive");
  std::vector<double> v(static_cast<std::size_t>(mdp.n_states), 0.0);
  std::vector<double> next(v.size(), 0.0);
  double residual = 0.0;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    residual = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
      next[s] = bellman_backup(mdp, v, s);
      residual = std::max(residual, std::abs(next[s] - v[s]));
    }
    v.swap(next);
    if (residual <= tol) return {std::move(v)};
  }
  throw ConvergenceError("value_iteration: sweep cap reached", residual);
}

UncertaintyField uncertainty_value_iteration(const TabularMdp& mdp, const InfoField& info,
                                             double tol,
                                             const std::optional<PolicyMatrix>& policy,
                                             bool square_discount) {
  if (!(tol > 0.0)) throw ValidationError("uncertainty_value_iteration: tol must be positive");
  info.validate();
  PolicyMatrix pi =
      policy.has_value() ? *policy : greedy_policy(mdp, value_iteration(mdp, tol).values);
  const double discount = square_discount ? mdp.gamma * mdp.gamma : mdp.gamma;
  std::vector<double> u(static_cast<std::size_t>(mdp.n_states), 0.0);
  std::vector<double> next(u.size(), 0.0);
  double residual = 0.0;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    residual = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
      double acc = 0.0;
      for (int a = 0; a < mdp.n_actions; ++a) {
        const double w = pi.at(s, a);
        if (w == 0.0) continue;
        double q = info.at(s, a);
        const auto row = mdp.row(s, a);
        for (int s2 = 0; s2 < mdp.n_states; ++s2) q += discount * row[s2] * u[s2];
        acc += w * q;
      }
      next[s] = acc;
      residual = std::max(residual, std::abs(next[s] - u[s]));
    }
    u.swap(next);
    if (residual <= tol) return {std::move(u)};
  }
  throw ConvergenceError("uncertainty_value_iteration: sweep cap reached", residual);
}

RelayTable relay_value_operator(const TabularMdp& mdp, const std::vector<double>& v_phi,
                                const RelayTable& table) {
  RelayTable out = RelayTable::zeros(mdp.n_states, RelayTable::Kind::pragmatic);
  std::vector<double> column(static_cast<std::size_t>(mdp.n_states));
  for (int anchor = 0; anchor < mdp.n_states; ++anchor) {
    for (int s = 0; s < mdp.n_states; ++s) column[s] = table.at(s, anchor);
    column[anchor] = v_phi[anchor];
    for (int s = 0; s < mdp.n_states; ++s)
      out.at(s, anchor) = s == anchor ? v_phi[anchor] : bellman_backup(mdp, column, s);
  }
  return out;
}

RelayTable relay_uncertainty_operator(const TabularMdp& mdp, const InfoField& info,
                                      const std::vector<double>& u_bootstrap,
                                      const PolicyMatrix& policy, const RelayTable& table,
                                      bool square_discount) {
  const double discount = square_discount ? mdp.gamma * mdp.gamma : mdp.gamma;
  RelayTable out = RelayTable::zeros(mdp.n_states, RelayTable::Kind::epistemic);
  std::vector<double> column(static_cast<std::size_t>(mdp.n_states));
  for (int anchor = 0; anchor < mdp.n_states; ++anchor) {
    for (int s = 0; s < mdp.n_states; ++s) column[s] = table.at(s, anchor);
    column[anchor] = u_bootstrap[anchor];
    for (int s = 0; s < mdp.n_states; ++s) {
      if (s == anchor) {
        out.at(s, anchor) = u_bootstrap[anchor];
        continue;
      }
      double acc = 0.0;
      for (int a = 0; a < mdp.n_actions; ++a) {
        const double w = policy.at(s, a);
        if (w == 0.0) continue;
        double q = info.at(s, a);
        const auto row = mdp.row(s, a);
        for (int s2 = 0; s2 < mdp.n_states; ++s2) q += discount * row[s2] * column[s2];
        acc += w * q;
      }
      out.at(s, anchor) = acc;
    }
  }
  return out;
}

namespace {

// Absorbing-anchor value iteration shared by the pragmatic and epistemic columns.
template <typename Backup>
std::vector<double> absorbing_fixed_point(int n, int anchor, double pinned, double tol,
                                          const Backup& backup, const char* who) {
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  w[static_cast<std::size_t>(anchor)] = pinned;
  std::vector<double> next(w.size(), 0.0);
  double residual = 0.0;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    residual = 0.0;
    for (int s = 0; s < n; ++s) {
      next[s] = s == anchor ? pinned : backup(w, s);
      residual = std::max(residual, std::abs(next[s] - w[s]));
    }
    w.swap(next);
    if (residual <= tol) return w;
  }
  throw ConvergenceError(std::string(who) + ": sweep cap reached", residual);
}

}  // namespace

std::vector<double> relay_value_column(const TabularMdp& mdp, const std::vector<double>& v_phi,
                                       int anchor, double tol) {
  if (anchor < 0 || anchor >= mdp.n_states)
    throw ValidationError("relay_value_column: invalid anchor");
  auto backup = [&](const std::vector<double>& w, int s) { return bellman_backup(mdp, w, s); };
  return absorbing_fixed_point(mdp.n_states, anchor, v_phi[anchor], tol, backup,
                               "relay_value_column");
}

RelayTable relay_value_table(const TabularMdp& mdp, const std::vector<double>& v_phi,
                             double tol) {
  RelayTable table = RelayTable::zeros(mdp.n_states, RelayTable::Kind::pragmatic);
  for (int anchor = 0; anchor < mdp.n_states; ++anchor) {
    const auto column = relay_value_column(mdp, v_phi, anchor, tol);
    for (int s = 0; s < mdp.n_states; ++s) table.at(s, anchor) = column[s];
  }
  return table;
}

std::vector<double> relay_uncertainty_column(const TabularMdp& mdp, const InfoField& info,
                                             const std::vector<double>& u_bootstrap, int anchor,
                                             const PolicyMatrix& policy, double tol,
                                             bool square_discount) {
  if (anchor < 0 || anchor >= mdp.n_states)
    throw ValidationError("relay_uncertainty_column: invalid anchor");
  const double discount = square_discount ? mdp.gamma * mdp.gamma : mdp.gamma;
  auto backup = [&](const std::vector<double>& w, int s) {
    double acc = 0.0;
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double weight = policy.at(s, a);
      if (weight == 0.0) continue;
      double q = info.at(s, a);
      const auto row = mdp.row(s, a);
      for (int s2 = 0; s2 < mdp.n_states; ++s2) q += discount * row[s2] * w[s2];
      acc += weight * q;
    }
    return acc;
  };
  return absorbing_fixed_point(mdp.n_states, anchor, u_bootstrap[anchor], tol, backup,
                               "relay_uncertainty_column");
}

RelayTable relay_uncertainty_table(const TabularMdp& mdp, const InfoField& info,
                                   const std::vector<double>& u_bootstrap,
                                   const PolicyMatrix& policy, double tol, bool square_discount) {
  RelayTable table = RelayTable::zeros(mdp.n_states, RelayTable::Kind::epistemic);
  for (int anchor = 0; anchor < mdp.n_states; ++anchor) {
    const auto column =
        relay_uncertainty_column(mdp, info, u_bootstrap, anchor, policy, tol, square_discount);
    for (int s = 0; s < mdp.n_states; ++s) table.at(s, anchor) = column[s];
  }
  return table;
}

double brute_force_relay_oracle(const TabularMdp& mdp, const std::vector<double>& v_phi, int s,
                                int anchor, int max_k) {
  if (s < 0 || s >= mdp.n_states || anchor < 0 || anchor >= mdp.n_states)
    throw ValidationError("brute_force_relay_oracle: invalid state");
  if (max_k < 0) throw ValidationError("brute_force_relay_oracle: max_k must be >= 0");
  if (static_cast<long long>(mdp.n_states) * std::max(max_k, 1) > 1'000'000)
    throw ValidationError("brute_force_relay_oracle: instance too large for exact DP");
  if (s == anchor) return v_phi[anchor];

  const int n = mdp.n_states;
  const double bootstrap = v_phi[anchor];

  if (mdp.is_deterministic()) {
    // hit[j][x]: best discounted reward along length-j paths from x whose first
    // anchor visit is at step j. avoid[j][x]: best over length-j paths that
    // never touch the anchor, zero tail.
    std::vector<double> hit(static_cast<std::size_t>(n), kNegInf);
    std::vector<double> avoid(static_cast<std::size_t>(n), 0.0);
    avoid[static_cast<std::size_t>(anchor)] = kNegInf;
    std::vector<double> hit_next(hit.size()), avoid_next(avoid.size());
    double best = 0.0;  // k = 0 is inadmissible for s != anchor; the empty avoid path scores 0
    for (int j = 1; j <= max_k; ++j) {
      for (int x = 0; x < n; ++x) {
        double h = kNegInf;
        double v = kNegInf;
        if (x != anchor) {
          for (int a = 0; a < mdp.n_actions; ++a) {
            const int y = mdp.successor(x, a);
            if (y == anchor) {
              h = std::max(h, mdp.r(x, a));
            } else {
              if (hit[y] > kNegInf) h = std::max(h, mdp.r(x, a) + mdp.gamma * hit[y]);
              if (avoid[y] > kNegInf) v = std::max(v, mdp.r(x, a) + mdp.gamma * avoid[y]);
            }
          }
        }
        hit_next[x] = h;
        avoid_next[x] = v;
      }
      hit.swap(hit_next);
      avoid.swap(avoid_next);
      const double h_s = hit[static_cast<std::size_t>(s)];
      if (h_s > kNegInf) best = std::max(best, h_s + std::pow(mdp.gamma, j) * bootstrap);
      best = std::max(best, avoid[static_cast<std::size_t>(s)]);
    }
    return best;
  }

  // Stochastic case: finite-horizon dynamic programming with the anchor
  // absorbing at its bootstrap value and a zero tail past max_k.
  std::vector<double> value(static_cast<std::size_t>(n), 0.0);
  value[static_cast<std::size_t>(anchor)] = bootstrap;
  std::vector<double> next(value.size(), 0.0);
  for (int j = 0; j < max_k; ++j) {
    for (int x = 0; x < n; ++x)
      next[x] = x == anchor ? bootstrap : bellman_backup(mdp, value, x);
    value.swap(next);
  }
  return value[static_cast<std::size_t>(s)];
}

std::vector<double> relay_advantage(const RelayTable& table, const std::vector<double>& v_phi) {
  std::vector<double> delta(static_cast<std::size_t>(table.n), 0.0);
  for (int s = 0; s < table.n; ++s) {
    double best = kNegInf;
    for (int anchor = 0; anchor < table.n; ++anchor) best = std::max(best, table.at(s, anchor));
    delta[static_cast<std::size_t>(s)] = best - v_phi[s];
  }
  return delta;
}

int relay_gateway(const RelayTable& table, const std::vector<double>& v_phi, int source) {
  int best_anchor = 0;
  double best = kNegInf;
  for (int anchor = 0; anchor < table.n; ++anchor) {
    const double gain = table.at(source, anchor) - v_phi[source];
    if (gain > best) {
      best = gain;
      best_anchor = anchor;
    }
  }
  return best_anchor;
}

namespace {

double interp_line(const std::vector<double>& field, double x) {
  const double hi = static_cast<double>(field.size() - 1);
  const double clamped = std::clamp(x, 0.0, hi);
  const auto lo = static_cast<std::size_t>(std::floor(clamped));
  if (lo + 1 >= field.size()) return field.back();
  const double frac = clamped - static_cast<double>(lo);
  return field[lo] * (1.0 - frac) + field[lo + 1] * frac;
}

TabularMdp line_graph(int n, double gamma) {
  TabularMdp mdp = TabularMdp::zeros(n, 3, gamma);  // left, right, stay; rewards zero
  for (int s = 0; s < n; ++s) {
    mdp.p(s, 0, std::max(s - 1, 0)) = 1.0;
    mdp.p(s, 1, std::min(s + 1, n - 1)) = 1.0;
    mdp.p(s, 2, s) = 1.0;
  }
  return mdp;
}

}  // namespace

std::vector<double> make_lipschitz_line_field(int n_states, double lipschitz,
                                              std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> field(static_cast<std::size_t>(n_states), 0.0);
  for (std::size_t i = 1; i < field.size(); ++i) {
    const double slope = lipschitz * (2.0 * rng.next_double() - 1.0);
    field[i] = field[i - 1] + slope;
  }
  return field;
}

HallucinationCheck hallucination_bound_check(const std::vector<double>& v_true, double lipschitz,
                                             double delta, double gamma, int n) {
  if (lipschitz < 0.0 || delta < 0.0)
    throw ValidationError("hallucination_bound_check: L and delta must be >= 0");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw ValidationError("hallucination_bound_check: gamma must lie in (0,1)");
  if (v_true.size() < 2)
    throw ValidationError("hallucination_bound_check: field needs at least two states");

  HallucinationCheck out;
  out.bound_main = lipschitz * delta / (1.0 - std::pow(gamma, n));
  out.bound_appendix = lipschitz * delta / (1.0 - gamma);

  const int m = static_cast<int>(v_true.size());
  const TabularMdp mdp = line_graph(m, gamma);
  double worst = 0.0;
  for (int anchor = 0; anchor < m; ++anchor) {
    std::vector<double> perturbed = v_true;
    perturbed[static_cast<std::size_t>(anchor)] =
        interp_line(v_true, static_cast<double>(anchor) + delta);
    const auto column_true = relay_value_column(mdp, v_true, anchor, 1e-10);
    const auto column_pert = relay_value_column(mdp, perturbed, anchor, 1e-10);
    for (int s = 0; s < m; ++s)
      worst = std::max(worst, std::abs(column_pert[s] - column_true[s]));
  }
  out.measured = worst;
  return out;
}

}  // namespace md
