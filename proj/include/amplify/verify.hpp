// Numerical verification suites: each check exercises one identity or bound
// on concrete MDPs (the discretized Choc-Kale chain, random MDPs, and a
// synthetic smooth ring built for non-vacuous coverage) and reports the
// measured slack. The switching_horizon check carries its own bisection oracle so the
// closed form and the root-finding route stay independent.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amplify/mdp.hpp"
#include "amplify/random.hpp"

namespace amplify {

struct CheckResult {
  std::string name;
  bool passed = false;
  bool vacuous = false;  // no state met the check's premise; reported, not hidden
  std::string details;
  double seconds = 0.0;
};

// Counterfactual value-difference identity on random MDPs
// (<= 10 states, <= 4 actions, gamma = 0.9), max |lhs - rhs| <= 1e-6.
CheckResult check_counterfactual_identity(std::uint64_t seed, int n_mdps = 50);

// Repetition identities at premise-qualified states of the Choc-Kale chain:
// where the greedy action is constant over everything reachable within k
// steps, (i) repeating it for k steps and reverting loses nothing, and
// (ii) the repeated-action advantage equals the discounted sum of event
// advantages along the deviation trajectory.
CheckResult check_repetition_identities();

// Value loss of optimal k-aggregation <= 2kL/(1-gamma) on the Choc-Kale
// chain, gamma in {0.95, 0.99}, k in {2, 3, 5}, empirical L.
CheckResult check_aggregation_value_loss();

// Aggregated-advantage lower bound at states with A >= 2kL (Choc-Kale plus
// the smooth ring), and the exact identity between the lossless and lossy
// bound formulas on a parameter grid.
CheckResult check_amplification_lower_bound();

// Switching-cost amplification: states above the switching_horizon threshold have
// extended advantage >= 2T (Choc-Kale T in {1,2,3} plus the smooth ring).
CheckResult check_switching_amplification();

// Closed-form switching_horizon vs bisection root on a 3x3x3 grid, |diff| <= 1e-6.
CheckResult check_switching_horizon_oracle();

// Lambert W residuals |w e^w - x| <= 1e-12 * max(1, |x|) on both real
// branches' domain grids.
CheckResult check_lambert_residuals();

// k = 1 aggregation and T = 0 switching reproduce event-level trajectories
// bit-for-bit and event-level optimal values within solver tolerance.
CheckResult check_wrapper_identities(std::uint64_t seed);

// All checks, in report order.
std::vector<CheckResult> verify_all(std::uint64_t seed);

// ---- shared builders -----------------------------------------------------

// Dense random MDP with uniform-simplex transition rows and U[0,1) rewards.
FiniteMDP random_mdp(Rng& rng, int n_states, int n_actions, double gamma);
DeterministicPolicy random_policy(Rng& rng, int n_states, int n_actions);

// n-state ring, 2 actions: action 0 pays `dr` more than action 1 everywhere,
// a sinusoidal per-state reward wobble of amplitude eps_r, and transitions
// that self-loop except for `leak` mass onto the next state. Small L, large
// advantage: the non-vacuous regime for the amplification bounds.
FiniteMDP smooth_ring_mdp(int n_states, double dr, double eps_r, double leak,
                          double gamma);

}  // namespace amplify
