// Tabular Q-learning over bucketed observations with a uniform-random
// behavior policy, plus Monte Carlo evaluation of the resulting greedy
// policies. Training and evaluation are pure functions of their seeds.
#pragma once

#include <cstdint>
#include <string>

#include "amplify/mdp.hpp"
#include "amplify/temporal.hpp"
#include "json.hpp"

namespace amplify {

struct QLearnConfig {
  long long n_events = 30000;  // total base-event budget
  double alpha0 = 1.0;         // initial learning rate, (0, 1]
  // Per-(state,action) visit decay exponent. The default keeps the learner
  // plastic over the short event budget; heavier decay converges onto the
  // observation-aliased fixed point and erases the aggregation advantage at
  // high noise.
  double alpha_decay = 0.2;
  double gamma = 0.99;
  double init_q = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class WrapperKind { kNone, kAggregate, kSwitch };

struct WrapperConfig {
  WrapperKind kind = WrapperKind::kNone;
  int k = 1;          // repetition horizon for kAggregate
  double cost = 0.0;  // penalty for kSwitch

  std::string label() const;  // "none" | "agg_k3" | "switch_t1" ...
  static WrapperConfig none() { return {}; }
  static WrapperConfig aggregate(int k) { return {WrapperKind::kAggregate, k, 0.0}; }
  static WrapperConfig switching(double cost) { return {WrapperKind::kSwitch, 1, cost}; }
  void validate() const;
};

// Greedy policy learned from bucketed observations. For the switching
// wrapper the table is indexed by (bucket, previous action).
struct TrainedPolicy {
  WrapperConfig wrapper;
  QLearnConfig config;
  int n_buckets = 0;
  int n_actions = 0;
  QTable q;                        // learner-state rows
  std::vector<int> greedy_action;  // consistent with q under lowest-index ties
  long long events_consumed = 0;
  long long learner_steps = 0;

  int n_learner_states() const {
    return wrapper.kind == WrapperKind::kSwitch ? n_buckets * n_actions : n_buckets;
  }
  int state_index(int bucket, int prev_action) const {
    return wrapper.kind == WrapperKind::kSwitch ? bucket * n_actions + prev_action
                                                : bucket;
  }
  int act(int bucket, int prev_action) const {
    return greedy_action[static_cast<std::size_t>(state_index(bucket, prev_action))];
  }
  // Episode-start action for the switching wrapper: the best no-switch
  // diagonal entry, matching the training convention that the first action
  // is its own predecessor.
  int act_initial(int bucket) const;

  nlohmann::json to_json() const;
  static TrainedPolicy from_json(const nlohmann::json& j);
};

// Uniform-random behavior; per-step update
//   Q(s,a) += alpha * (r + gamma^{events_elapsed} * max_a' Q(s',a') - Q(s,a))
// with alpha = alpha0 / (1 + visits(s,a))^alpha_decay. Stops once the
// cumulative base-event budget is consumed (overshoot < k on an aggregated
// final step).
TrainedPolicy train(Env& env, const WrapperConfig& wrapper, const QLearnConfig& config);

struct EvalResult {
  double mean = 0.0;
  double std_error = 0.0;  // sample std / sqrt(n_rollouts)
  std::vector<double> returns;
};

// Mean discounted raw return of the greedy policy over n_rollouts seeded
// rollouts of `horizon` base events. Aggregation executes base events;
// switching penalties are never included in the reported return.
EvalResult evaluate(Env& env, const TrainedPolicy& policy, int n_rollouts, int horizon,
                    double gamma, std::uint64_t seed);

}  // namespace amplify
