#include "amplify/temporal.hpp"

#include <stdexcept>

namespace amplify {

EnvStep aggregate_step(Env& env, int action, int k, double gamma, Rng& rng) {
  if (k < 1) throw std::invalid_argument("aggregate_step: k must be >= 1");
  EnvStep out;
  double disc = 1.0;
  for (int i = 0; i < k; ++i) {
    out.reward += disc * env.step(action, rng);
    disc *= gamma;
  }
  out.observation = env.observe(rng);
  out.events_elapsed = k;
  return out;
}

EnvStep switch_step(Env& env, int action, int prev_action, double cost, Rng& rng) {
  EnvStep out;
  out.reward = env.step(action, rng) - (action != prev_action ? cost : 0.0);
  out.observation = env.observe(rng);
  out.events_elapsed = 1;
  return out;
}

ReturnDecomposition penalized_return_decomposition(
    std::span<const SwitchRecord> trajectory, double cost, double gamma,
    std::optional<int> initial_prev_action) {
  ReturnDecomposition out;
  if (trajectory.empty()) return out;
  int prev = initial_prev_action.value_or(trajectory.front().action);
  double disc = 1.0;
  for (const auto& rec : trajectory) {
    out.raw_return += disc * rec.reward;
    if (rec.action != prev) out.penalty_paid += disc * cost;
    prev = rec.action;
    disc *= gamma;
  }
  return out;
}

}  // namespace amplify
