// Tabular MDP substrate: explicit transition/reward tables, exact solvers,
// and the k-aggregation / switching-cost reparameterizations used as
// ground-truth oracles by the rest of the project.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace amplify {

class FiniteMDP;

// State x action table of reals. Shared by the exact solvers and the
// Q-learner.
struct QTable {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> values;  // row-major [state][action]

  QTable() = default;
  QTable(int states, int actions, double fill = 0.0)
      : n_states(states), n_actions(actions),
        values(static_cast<std::size_t>(states) * actions, fill) {}

  double& at(int s, int a) { return values[static_cast<std::size_t>(s) * n_actions + a]; }
  double at(int s, int a) const { return values[static_cast<std::size_t>(s) * n_actions + a]; }

  std::span<const double> row(int s) const {
    return {values.data() + static_cast<std::size_t>(s) * n_actions,
            static_cast<std::size_t>(n_actions)};
  }

  // max_a Q(s, a)
  double state_value(int s) const;
  // argmax_a Q(s, a), ties broken by lowest action index
  int greedy_action(int s) const;

  bool finite() const;
};

struct DeterministicPolicy {
  std::vector<int> action_of;  // one action index per state
};

struct StateAdvantage {
  int best_action = 0;
  int second_action = 0;
  double advantage = 0.0;  // Q(s, best) - Q(s, second) >= 0
};

struct AdvantageProfile {
  std::vector<StateAdvantage> per_state;
  double max_advantage() const;
};

// Explicit tabular MDP. Transition rows are validated at construction:
// nonnegative, sum to 1 within 1e-9; rewards finite; discount in [0, 1).
class FiniteMDP {
 public:
  FiniteMDP(int n_states, int n_actions, double gamma,
            std::vector<double> transition, std::vector<double> reward);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  double gamma() const { return gamma_; }

  double p(int s, int a, int next) const {
    return transition_[(static_cast<std::size_t>(s) * n_actions_ + a) * n_states_ + next];
  }
  double r(int s, int a) const {
    return reward_[static_cast<std::size_t>(s) * n_actions_ + a];
  }
  std::span<const double> transition_row(int s, int a) const {
    return {transition_.data() + (static_cast<std::size_t>(s) * n_actions_ + a) * n_states_,
            static_cast<std::size_t>(n_states_)};
  }

  double max_abs_reward() const;

  nlohmann::json to_json() const;
  static FiniteMDP from_json(const nlohmann::json& j);

 private:
  int n_states_;
  int n_actions_;
  double gamma_;
  std::vector<double> transition_;  // [s][a][s']
  std::vector<double> reward_;      // [s][a]
};

// Index mapping for the switching-cost extension: extended state encodes
// (base state, previously executed action).
struct ExtendedIndex {
  int n_actions = 0;
  int extended(int base, int prev_action) const { return base * n_actions + prev_action; }
  int base_state(int ext) const { return ext / n_actions; }
  int prev_action(int ext) const { return ext % n_actions; }
};

// ---- exact solvers -----------------------------------------------------

// Optimal Q by value iteration; the returned table satisfies the Bellman
// optimality equation with max-norm residual <= tol.
QTable solve_q_star(const FiniteMDP& mdp, double tol = 1e-8);

// Q^pi by iterative policy evaluation to fixed-point residual <= tol.
QTable policy_q(const FiniteMDP& mdp, const DeterministicPolicy& policy, double tol = 1e-8);

// One Bellman optimality backup applied to q; used to assert residuals.
double bellman_residual(const FiniteMDP& mdp, const QTable& q);

DeterministicPolicy greedy(const QTable& q);

// Per-state gap between best and second-best Q-value; requires >= 2 actions.
AdvantageProfile advantages(const QTable& q);

// ---- reparameterizations ------------------------------------------------

// M^{xk}: every action is executed k consecutive times. Same state set,
// transition = k-step kernel, reward = E[sum_{i<k} gamma^i r_i],
// discount = gamma^k.
FiniteMDP aggregate_mdp(const FiniteMDP& mdp, int k);

// Extended MDP over (base state, previous action) with reward
// R(b, a) - cost * 1[a != prev]. Use ExtendedIndex{mdp.n_actions()} to map
// between extended and base states.
FiniteMDP switching_cost_mdp(const FiniteMDP& mdp, double cost);

// ---- diagnostics ---------------------------------------------------------

struct CounterfactualGap {
  double lhs = 0.0;  // V^pi(b) - V^rho(b), from policy evaluation
  double rhs = 0.0;  // E_rho[sum_i gamma^i (Q^pi(b_i, pi) - Q^pi(b_i, rho))]
};

// Both sides of the counterfactual value-difference identity, computed
// exactly: lhs from two policy evaluations, rhs by propagating the state
// distribution under rho for `horizon` steps. Requires
// gamma^horizon * r_max / (1 - gamma) <= tol so the truncated tail is
// covered by the tolerance.
CounterfactualGap counterfactual_gap(const FiniteMDP& mdp,
                                     const DeterministicPolicy& pi,
                                     const DeterministicPolicy& rho, int start,
                                     int horizon, double tol);

// Empirical smoothness: max |q(s, a'') - q(s', a'')| over transitions
// (s, a, s') with positive probability and over all actions a''.
double smoothness(const FiniteMDP& mdp, const QTable& q);

// Signal-to-noise ratio of an advantage profile:
//   sup A / sup { A(b) : A(b) <= 2*eps*r_max/(1-gamma)^2 }  -  1.
// Returns +infinity when no state qualifies for the denominator.
double snr(const QTable& q, double epsilon, double r_max, double gamma);

}  // namespace amplify
