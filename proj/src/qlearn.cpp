#include "amplify/qlearn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace amplify {

void QLearnConfig::validate() const {
  if (n_events <= 0) throw std::invalid_argument("QLearnConfig: n_events must be positive");
  if (!(alpha0 > 0.0) || alpha0 > 1.0)
    throw std::invalid_argument("QLearnConfig: alpha0 must lie in (0, 1]");
  if (alpha_decay < 0.0)
    throw std::invalid_argument("QLearnConfig: alpha_decay must be >= 0");
  if (!(gamma >= 0.0) || gamma >= 1.0)
    throw std::invalid_argument("QLearnConfig: gamma must lie in [0, 1)");
}

void WrapperConfig::validate() const {
  if (kind == WrapperKind::kAggregate && k < 1)
    throw std::invalid_argument("WrapperConfig: aggregation horizon must be >= 1");
  if (kind == WrapperKind::kSwitch && cost < 0.0)
    throw std::invalid_argument("WrapperConfig: switching cost must be >= 0");
}

std::string WrapperConfig::label() const {
  char buf[64];
  switch (kind) {
    case WrapperKind::kNone:
      return "none";
    case WrapperKind::kAggregate:
      std::snprintf(buf, sizeof buf, "agg_k%d", k);
      return buf;
    case WrapperKind::kSwitch:
      std::snprintf(buf, sizeof buf, "switch_t%g", cost);
      return buf;
  }
  return "unknown";
}

int TrainedPolicy::act_initial(int bucket) const {
  if (wrapper.kind != WrapperKind::kSwitch) return act(bucket, 0);
  int best = 0;
  double best_q = q.at(state_index(bucket, 0), 0);
  for (int a = 1; a < n_actions; ++a) {
    const double v = q.at(state_index(bucket, a), a);
    if (v > best_q) {
      best_q = v;
      best = a;
    }
  }
  return best;
}

nlohmann::json TrainedPolicy::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (int s = 0; s < q.n_states; ++s) rows.push_back(q.row(s));
  return {{"wrapper", {{"kind", static_cast<int>(wrapper.kind)},
                       {"k", wrapper.k},
                       {"cost", wrapper.cost}}},
          {"config", {{"n_events", config.n_events},
                      {"alpha0", config.alpha0},
                      {"alpha_decay", config.alpha_decay},
                      {"gamma", config.gamma},
                      {"init_q", config.init_q},
                      {"seed", config.seed}}},
          {"n_buckets", n_buckets},
          {"n_actions", n_actions},
          {"q", std::move(rows)},
          {"events_consumed", events_consumed},
          {"learner_steps", learner_steps}};
}

TrainedPolicy TrainedPolicy::from_json(const nlohmann::json& j) {
  TrainedPolicy p;
  const auto& w = j.at("wrapper");
  p.wrapper.kind = static_cast<WrapperKind>(w.at("kind").get<int>());
  p.wrapper.k = w.at("k").get<int>();
  p.wrapper.cost = w.at("cost").get<double>();
  const auto& c = j.at("config");
  p.config.n_events = c.at("n_events").get<long long>();
  p.config.alpha0 = c.at("alpha0").get<double>();
  p.config.alpha_decay = c.at("alpha_decay").get<double>();
  p.config.gamma = c.at("gamma").get<double>();
  p.config.init_q = c.at("init_q").get<double>();
  p.config.seed = c.at("seed").get<std::uint64_t>();
  p.n_buckets = j.at("n_buckets").get<int>();
  p.n_actions = j.at("n_actions").get<int>();
  p.events_consumed = j.value("events_consumed", 0LL);
  p.learner_steps = j.value("learner_steps", 0LL);
  const auto& rows = j.at("q");
  p.q = QTable(p.n_learner_states(), p.n_actions, 0.0);
  if (static_cast<int>(rows.size()) != p.q.n_states)
    throw std::invalid_argument("TrainedPolicy::from_json: q row count mismatch");
  for (int s = 0; s < p.q.n_states; ++s) {
    if (static_cast<int>(rows[s].size()) != p.n_actions)
      throw std::invalid_argument("TrainedPolicy::from_json: q column mismatch");
    for (int a = 0; a < p.n_actions; ++a) p.q.at(s, a) = rows[s][a].get<double>();
  }
  if (!p.q.finite())
    throw std::invalid_argument("TrainedPolicy::from_json: non-finite Q value");
  p.greedy_action = greedy(p.q).action_of;
  return p;
}

TrainedPolicy train(Env& env, const WrapperConfig& wrapper, const QLearnConfig& config) {
  config.validate();
  wrapper.validate();
  if (env.n_buckets() <= 0 || env.n_actions() <= 0)
    throw std::invalid_argument("train: environment must expose finite buckets and actions");

  TrainedPolicy policy;
  policy.wrapper = wrapper;
  policy.config = config;
  policy.n_buckets = env.n_buckets();
  policy.n_actions = env.n_actions();
  const int n_states = policy.n_learner_states();
  const int na = policy.n_actions;
  policy.q = QTable(n_states, na, config.init_q);
  std::vector<long long> visits(static_cast<std::size_t>(n_states) * na, 0);

  Rng rng(config.seed);
  env.reset();
  int obs = env.observe(rng);
  int prev_action = -1;
  long long events = 0;
  long long steps = 0;

  while (events < config.n_events) {
    const int action = uniform_int(rng, na);
    if (prev_action < 0) prev_action = action;  // first action: no switch

    EnvStep step;
    switch (wrapper.kind) {
      case WrapperKind::kNone:
        step = aggregate_step(env, action, 1, config.gamma, rng);
        break;
      case WrapperKind::kAggregate:
        step = aggregate_step(env, action, wrapper.k, config.gamma, rng);
        break;
      case WrapperKind::kSwitch:
        step = switch_step(env, action, prev_action, wrapper.cost, rng);
        break;
    }

    const int s = policy.state_index(obs, prev_action);
    const int s_next = policy.state_index(step.observation, action);
    // the only bootstrap discount ever used is gamma^{events_elapsed}
    const double boot = std::pow(config.gamma, step.events_elapsed);
    auto& n_sa = visits[static_cast<std::size_t>(s) * na + action];
    const double alpha =
        config.alpha0 / std::pow(1.0 + static_cast<double>(n_sa), config.alpha_decay);
    const double target = step.reward + boot * policy.q.state_value(s_next);
    policy.q.at(s, action) += alpha * (target - policy.q.at(s, action));

    ++n_sa;
    ++steps;
    events += step.events_elapsed;
    obs = step.observation;
    prev_action = action;
  }

  policy.events_consumed = events;
  policy.learner_steps = steps;
  policy.greedy_action = greedy(policy.q).action_of;
  return policy;
}

EvalResult evaluate(Env& env, const TrainedPolicy& policy, int n_rollouts, int horizon,
                    double gamma, std::uint64_t seed) {
  if (n_rollouts < 1) throw std::invalid_argument("evaluate: need at least one rollout");
  if (horizon < 1) throw std::invalid_argument("evaluate: horizon must be >= 1");

  EvalResult out;
  out.returns.reserve(static_cast<std::size_t>(n_rollouts));
  for (int r = 0; r < n_rollouts; ++r) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
    env.reset();
    int obs = env.observe(rng);
    int prev_action = -1;
    double ret = 0.0;
    double disc = 1.0;
    long long t = 0;
    while (t < horizon) {
      int action;
      if (policy.wrapper.kind == WrapperKind::kSwitch) {
        action = prev_action < 0 ? policy.act_initial(obs) : policy.act(obs, prev_action);
      } else {
        action = policy.act(obs, 0);
      }
      const long long reps =
          policy.wrapper.kind == WrapperKind::kAggregate
              ? std::min<long long>(policy.wrapper.k, horizon - t)
              : 1;
      for (long long i = 0; i < reps; ++i) {
        ret += disc * env.step(action, rng);  // raw reward, penalties excluded
        disc *= gamma;
        ++t;
      }
      obs = env.observe(rng);
      prev_action = action;
    }
    out.returns.push_back(ret);
  }

  double mean = 0.0;
  for (double v : out.returns) mean += v;
  mean /= static_cast<double>(n_rollouts);
  double var = 0.0;
  for (double v : out.returns) var += (v - mean) * (v - mean);
  var = n_rollouts > 1 ? var / static_cast<double>(n_rollouts - 1) : 0.0;
  out.mean = mean;
  out.std_error = std::sqrt(var / static_cast<double>(n_rollouts));
  return out;
}

}  // namespace amplify
