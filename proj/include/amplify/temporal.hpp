// Trajectory-level temporal abstraction wrappers: k-step action repetition
// and switching-cost penalization, applied to live simulators (the exact
// counterparts on explicit MDPs live in mdp.hpp).
#pragma once

#include <optional>
#include <span>

#include "amplify/env.hpp"

namespace amplify {

// One learner-visible interaction. events_elapsed is k for an aggregated
// step and 1 otherwise; consumers must bootstrap with gamma^events_elapsed.
struct EnvStep {
  int observation = 0;
  double reward = 0.0;
  int events_elapsed = 1;
};

struct AggregateConfig {
  int k = 1;
};

struct SwitchConfig {
  double cost = 0.0;
};

// Executes the action k consecutive base events; the returned reward is the
// internally discounted sum over the block and the observation is taken
// after the k-th event. k = 1 reproduces a bare step exactly (same draws in
// the same order).
EnvStep aggregate_step(Env& env, int action, int k, double gamma, Rng& rng);

// One base event with the reward reduced by `cost` iff the action changed.
// The learner pairs the returned observation with the executed action as its
// next (bucket, previous-action) state.
EnvStep switch_step(Env& env, int action, int prev_action, double cost, Rng& rng);

struct SwitchRecord {
  int action = 0;
  double reward = 0.0;  // raw reward, before any penalty
};

struct ReturnDecomposition {
  double raw_return = 0.0;
  double penalty_paid = 0.0;  // discounted fictitious switching penalties
  double penalized() const { return raw_return - penalty_paid; }
};

// Splits a recorded trajectory into raw discounted return and discounted
// penalty total. Without initial_prev_action the first record never counts
// as a switch (episode-start convention); with it, the first record switches
// relative to that action.
ReturnDecomposition penalized_return_decomposition(
    std::span<const SwitchRecord> trajectory, double cost, double gamma,
    std::optional<int> initial_prev_action = std::nullopt);

}  // namespace amplify
