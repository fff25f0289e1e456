#pragma once

#include <optional>
#include <vector>

#include "minddreamer/mdp.hpp"

namespace md {

struct ValueField {
  std::vector<double> values;
};

struct UncertaintyField {
  std::vector<double> values;  // non-negative
};

// Per-(state, action) local epistemic shock: information gain or shock variance.
struct InfoField {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> shocks;

  static InfoField zeros(int n_states, int n_actions) {
    return {n_states, n_actions,
            std::vector<double>(static_cast<std::size_t>(n_states) * n_actions, 0.0)};
  }
  static InfoField constant(int n_states, int n_actions, double value) {
    return {n_states, n_actions,
            std::vector<double>(static_cast<std::size_t>(n_states) * n_actions, value)};
  }
  double at(int s, int a) const { return shocks[static_cast<std::size_t>(s) * n_actions + a]; }
  double& at(int s, int a) { return shocks[static_cast<std::size_t>(s) * n_actions + a]; }
  void validate() const;
};

// n x n field of relay potentials, entry (source s, anchor s').
// Diagonal convention: entries(s, s) holds the bootstrap field value at s.
struct RelayTable {
  enum class Kind { pragmatic, epistemic };
  int n = 0;
  Kind kind = Kind::pragmatic;
  std::vector<double> entries;

  static RelayTable zeros(int n, Kind kind) {
    return {n, kind, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0)};
  }
  double at(int source, int anchor) const {
    return entries[static_cast<std::size_t>(source) * n + anchor];
  }
  double& at(int source, int anchor) {
    return entries[static_cast<std::size_t>(source) * n + anchor];
  }
};

inline constexpr double kDefaultTol = 1e-8;
inline constexpr int kMaxSweeps = 100000;

// Optimal value field: ||V - T*V||_inf <= tol on return, ConvergenceError past the sweep cap.
ValueField value_iteration(const TabularMdp& mdp, double tol = kDefaultTol);

// Fixed point of U(s) = E_pi[ I(s,a) + gamma^2 U(s') ] under `policy`
// (default: greedy w.r.t. the optimal value field). Setting square_discount
// false evaluates the same recursion with plain gamma, for comparisons.
UncertaintyField uncertainty_value_iteration(const TabularMdp& mdp, const InfoField& info,
                                             double tol = kDefaultTol,
                                             const std::optional<PolicyMatrix>& policy = {},
                                             bool square_discount = true);

// One application of the pragmatic relay operator to a full table: for every
// anchor column the anchor entry is pinned to v_phi(anchor) and every other
// entry gets a Bellman backup. Contraction modulus gamma.
RelayTable relay_value_operator(const TabularMdp& mdp, const std::vector<double>& v_phi,
                                const RelayTable& table);

// One application of the epistemic relay operator under `policy`; the per-step
// factor is gamma^2 (or gamma when square_discount is false). Contraction
// modulus gamma^2.
RelayTable relay_uncertainty_operator(const TabularMdp& mdp, const InfoField& info,
                                      const std::vector<double>& u_bootstrap,
                                      const PolicyMatrix& policy, const RelayTable& table,
                                      bool square_discount = true);

// Column of the pragmatic relay fixed point for one anchor: the optimal value
// of the MDP in which `anchor` is absorbing with terminal value v_phi(anchor).
std::vector<double> relay_value_column(const TabularMdp& mdp, const std::vector<double>& v_phi,
                                       int anchor, double tol = kDefaultTol);

// Full pragmatic table (all anchors, diagonal = v_phi).
RelayTable relay_value_table(const TabularMdp& mdp, const std::vector<double>& v_phi,
                             double tol = kDefaultTol);

std::vector<double> relay_uncertainty_column(const TabularMdp& mdp, const InfoField& info,
                                             const std::vector<double>& u_bootstrap, int anchor,
                                             const PolicyMatrix& policy,
                                             double tol = kDefaultTol,
                                             bool square_discount = true);

RelayTable relay_uncertainty_table(const TabularMdp& mdp, const InfoField& info,
                                   const std::vector<double>& u_bootstrap,
                                   const PolicyMatrix& policy, double tol = kDefaultTol,
                                   bool square_discount = true);

// Exact max over k <= max_k of the anchor-constrained k-step objective
//   sum_t gamma^t r_t + gamma^k v_phi(anchor),  s_k = anchor (first visit),
// by dynamic programming over (state, step) pairs. Deterministic MDPs use the
// path formulation; k = 0 is admissible only when s == anchor. Paths that
// cannot reach the anchor contribute the best anchor-free discounted return
// truncated at max_k, matching the never-hit branch of the relay operator.
double brute_force_relay_oracle(const TabularMdp& mdp, const std::vector<double>& v_phi, int s,
                                int anchor, int max_k);

// Relay advantage Delta V(s) = max_anchor table(s, anchor) - v_phi(s).
std::vector<double> relay_advantage(const RelayTable& table, const std::vector<double>& v_phi);
int relay_gateway(const RelayTable& table, const std::vector<double>& v_phi, int source);

// Perturbation error of a Lipschitz bootstrap field against both published
// bound forms L*delta/(1-gamma^n) and L*delta/(1-gamma). The measured error
// propagates a perturbed anchor bootstrap through the relay recursion on a
// line graph carrying a piecewise-linear field with Lipschitz constant L.
struct HallucinationCheck {
  double bound_main = 0.0;      // L * delta / (1 - gamma^n)
  double bound_appendix = 0.0;  // L * delta / (1 - gamma)
  double measured = 0.0;
};

HallucinationCheck hallucination_bound_check(const std::vector<double>& v_true, double lipschitz,
                                             double delta, double gamma, int n);

// Piecewise-linear field on a line graph with slopes alternating in
// [-L, L]; unit spacing, so its Lipschitz constant is exactly L.
std::vector<double> make_lipschitz_line_field(int n_states, double lipschitz,
                                              std::uint64_t seed);

}  // namespace md
