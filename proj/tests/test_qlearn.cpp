#include <cmath>
#include <vector>

#include "amplify/choc_kale.hpp"
#include "amplify/qlearn.hpp"
#include "doctest.h"

using namespace amplify;

namespace {

class ConstEnv final : public Env {
 public:
  ConstEnv(double reward, int buckets = 1) : reward_(reward), buckets_(buckets) {}
  int n_actions() const override { return 2; }
  int n_buckets() const override { return buckets_; }
  void reset() override { events_ = 0; }
  double step(int, Rng&) override {
    ++events_;
    return reward_;
  }
  int observe(Rng&) override { return 0; }
  long long events_taken() const override { return events_; }

 private:
  double reward_;
  int buckets_;
  long long events_ = 0;
};

CkEnv make_ck(double sigma_n, double gamma) {
  CKParams params;
  params.gamma = gamma;
  return CkEnv(params, ObservationModel{sigma_n, 50});
}

QLearnConfig base_config(double gamma, std::uint64_t seed) {
  QLearnConfig c;
  c.gamma = gamma;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("train converges on a single-state constant-reward problem") {
  // with the 1/(1+n) running-average schedule the bias decays like
  // n^{-(1-gamma)}, so a small discount keeps the fixed point reachable
  // within the step budget
  ConstEnv env(2.0);
  QLearnConfig cfg = base_config(0.2, 4);
  cfg.alpha_decay = 1.0;
  cfg.n_events = 20000;
  const auto policy = train(env, WrapperConfig::none(), cfg);
  CHECK(std::abs(policy.q.at(0, 0) - 2.5) <= 0.01);
  CHECK(std::abs(policy.q.at(0, 1) - 2.5) <= 0.01);
}

TEST_CASE("zero-reward environment keeps the initial table") {
  ConstEnv env(0.0);
  QLearnConfig cfg = base_config(0.9, 4);
  cfg.n_events = 5000;
  const auto policy = train(env, WrapperConfig::none(), cfg);
  CHECK(policy.q.at(0, 0) == 0.0);
  CHECK(policy.q.at(0, 1) == 0.0);
}

TEST_CASE("training is a pure function of the seed") {
  auto env1 = make_ck(0.3, 0.95);
  auto env2 = make_ck(0.3, 0.95);
  QLearnConfig cfg = base_config(0.95, 99);
  cfg.n_events = 5000;
  const auto p1 = train(env1, WrapperConfig::aggregate(5), cfg);
  const auto p2 = train(env2, WrapperConfig::aggregate(5), cfg);
  CHECK(p1.q.values == p2.q.values);  // bitwise
  CHECK(p1.greedy_action == p2.greedy_action);
}

TEST_CASE("event budget accounting") {
  SUBCASE("event-level: one learner step per event") {
    auto env = make_ck(0.3, 0.95);
    QLearnConfig cfg = base_config(0.95, 1);
    cfg.n_events = 4000;
    const auto policy = train(env, WrapperConfig::none(), cfg);
    CHECK(policy.learner_steps == 4000);
    CHECK(policy.events_consumed == 4000);
  }
  SUBCASE("aggregated: budget conserved within k - 1") {
    auto env = make_ck(0.3, 0.95);
    QLearnConfig cfg = base_config(0.95, 1);
    cfg.n_events = 30000;
    const auto policy = train(env, WrapperConfig::aggregate(5), cfg);
    CHECK(policy.learner_steps == 6000);
    CHECK(policy.events_consumed == 30000);
    cfg.n_events = 30002;  // not divisible by k: overshoot below k
    auto env2 = make_ck(0.3, 0.95);
    const auto p2 = train(env2, WrapperConfig::aggregate(5), cfg);
    CHECK(p2.events_consumed >= 30002);
    CHECK(p2.events_consumed < 30002 + 5);
  }
}

TEST_CASE("aggregated updates bootstrap with gamma^k: exact replay") {
  // independent reimplementation of the training loop; tables must agree
  // bit-for-bit, pinning the rng consumption order, the state indexing, the
  // visit-based learning rate and the gamma^{events_elapsed} bootstrap
  const int k = 3;
  const double gamma = 0.95;
  QLearnConfig cfg = base_config(gamma, 31);
  cfg.n_events = 3000;

  auto env = make_ck(0.25, gamma);
  const auto policy = train(env, WrapperConfig::aggregate(k), cfg);

  CKParams params;
  params.gamma = gamma;
  CkEnv replay_env(params, ObservationModel{0.25, 50});
  replay_env.reset();
  Rng rng(cfg.seed);
  std::vector<double> q(50 * 2, cfg.init_q);
  std::vector<long long> visits(50 * 2, 0);
  int obs = replay_env.observe(rng);
  long long events = 0;
  while (events < cfg.n_events) {
    const int a = uniform_int(rng, 2);
    double reward = 0.0;
    double disc = 1.0;
    for (int i = 0; i < k; ++i) {
      reward += disc * replay_env.step(a, rng);
      disc *= gamma;
    }
    const int next_obs = replay_env.observe(rng);
    const double best_next = std::max(q[next_obs * 2], q[next_obs * 2 + 1]);
    const double alpha =
        cfg.alpha0 / std::pow(1.0 + static_cast<double>(visits[obs * 2 + a]), cfg.alpha_decay);
    q[obs * 2 + a] += alpha * (reward + std::pow(gamma, k) * best_next - q[obs * 2 + a]);
    ++visits[obs * 2 + a];
    events += k;
    obs = next_obs;
  }
  for (int s = 0; s < 50; ++s)
    for (int a = 0; a < 2; ++a) CHECK(policy.q.at(s, a) == q[s * 2 + a]);
}

TEST_CASE("switching wrapper learns on (bucket, previous action) states") {
  auto env = make_ck(0.2, 0.95);
  QLearnConfig cfg = base_config(0.95, 8);
  cfg.n_events = 3000;
  const auto policy = train(env, WrapperConfig::switching(1.0), cfg);
  CHECK(policy.q.n_states == 100);
  CHECK(policy.n_learner_states() == 100);
  // greedy mapping consistent with the table under the tie-break rule
  const auto pi = greedy(policy.q);
  CHECK(policy.greedy_action == pi.action_of);
}

TEST_CASE("TrainedPolicy JSON round-trip") {
  auto env = make_ck(0.3, 0.99);
  QLearnConfig cfg = base_config(0.99, 12);
  cfg.n_events = 2000;
  const auto policy = train(env, WrapperConfig::switching(2.0), cfg);
  const auto j = policy.to_json();
  const auto back = TrainedPolicy::from_json(j);
  CHECK(back.q.values == policy.q.values);
  CHECK(back.greedy_action == policy.greedy_action);
  CHECK(back.wrapper.kind == policy.wrapper.kind);
  CHECK(back.wrapper.cost == policy.wrapper.cost);
  CHECK(back.config.gamma == policy.config.gamma);
  CHECK(back.events_consumed == policy.events_consumed);

  auto bad = j;
  bad["q"][0][0] = "oops";
  CHECK_THROWS(TrainedPolicy::from_json(bad));
}

TEST_CASE("evaluate") {
  SUBCASE("constant-reward geometric series") {
    ConstEnv env(1.0);
    TrainedPolicy policy;
    policy.wrapper = WrapperConfig::none();
    policy.n_buckets = 1;
    policy.n_actions = 2;
    policy.q = QTable(1, 2, 0.0);
    policy.greedy_action = {0};
    const double gamma = 0.95;
    const auto result = evaluate(env, policy, 10, 1000, gamma, 3);
    const double expect = (1.0 - std::pow(gamma, 1000)) / (1.0 - gamma);
    CHECK(result.mean == doctest::Approx(expect).epsilon(1e-12));
    CHECK(result.std_error == doctest::Approx(0.0));
    CHECK(std::abs(result.mean - 1.0 / (1.0 - gamma)) <=
          std::pow(gamma, 1000) / (1.0 - gamma) + 1e-9);
  }
  SUBCASE("same seed gives bit-identical results") {
    auto env = make_ck(0.3, 0.95);
    QLearnConfig cfg = base_config(0.95, 5);
    cfg.n_events = 2000;
    const auto policy = train(env, WrapperConfig::none(), cfg);
    auto e1 = make_ck(0.3, 0.95);
    auto e2 = make_ck(0.3, 0.95);
    const auto r1 = evaluate(e1, policy, 20, 500, 0.95, 17);
    const auto r2 = evaluate(e2, policy, 20, 500, 0.95, 17);
    CHECK(r1.returns == r2.returns);
  }
  SUBCASE("std error equals sample std over sqrt(n)") {
    auto env = make_ck(0.3, 0.95);
    QLearnConfig cfg = base_config(0.95, 5);
    cfg.n_events = 2000;
    const auto policy = train(env, WrapperConfig::none(), cfg);
    auto e1 = make_ck(0.3, 0.95);
    const auto r = evaluate(e1, policy, 50, 200, 0.95, 23);
    double mean = 0.0;
    for (const double v : r.returns) mean += v;
    mean /= 50.0;
    double var = 0.0;
    for (const double v : r.returns) var += (v - mean) * (v - mean);
    var /= 49.0;
    CHECK(r.std_error == doctest::Approx(std::sqrt(var / 50.0)).epsilon(1e-12));
  }
}

namespace {

// Oracle policy: exact Q* of the discretized chain reindexed onto the
// noiseless observation buckets through their satisfaction centers.
TrainedPolicy oracle_bucket_policy(const CKParams& params, int n_buckets) {
  const auto mdp = build_discrete_mdp(params, n_buckets);
  const auto q_star = solve_q_star(mdp, 1e-10);
  TrainedPolicy policy;
  policy.wrapper = WrapperConfig::none();
  policy.n_buckets = n_buckets;
  policy.n_actions = 2;
  policy.q = QTable(n_buckets, 2, 0.0);
  for (int b = 0; b < n_buckets; ++b) {
    const double s_center = (b + 0.5) / n_buckets;
    const double p = std::log(s_center / (1.0 - s_center)) / params.tau;
    const int grid = ck_grid_snap(params, n_buckets, p);
    policy.q.at(b, 0) = q_star.at(grid, 0);
    policy.q.at(b, 1) = q_star.at(grid, 1);
  }
  policy.greedy_action = greedy(policy.q).action_of;
  return policy;
}

}  // namespace

TEST_CASE("oracle policy evaluated on the simulator matches its exact value") {
  // On a fine grid the discretization bias sits well below the Monte Carlo
  // error, so the simulator mean must land within 3 standard errors of the
  // grid optimum. Reward noise stays on so the standard error is meaningful.
  CKParams params;
  params.gamma = 0.95;
  const int n = 800;
  const auto policy = oracle_bucket_policy(params, n);
  CkEnv env(params, ObservationModel{0.0, n});
  const auto result = evaluate(env, policy, 100, 1000, params.gamma, 41);
  const auto mdp = build_discrete_mdp(params, n);
  const auto q_star = solve_q_star(mdp, 1e-10);
  const double v_star = q_star.state_value(ck_grid_snap(params, n, 0.0));
  CHECK(std::abs(result.mean - v_star) <= 3.0 * result.std_error);
}

TEST_CASE("noiseless training approaches the discretized optimum") {
  // Bucket aliasing under uniform exploration caps the asymptote near 94%
  // of the grid optimum at gamma = 0.95 (the learner's fixed point parks
  // its crossover a few buckets early); 90% leaves seed margin below that
  // ceiling.
  auto env = make_ck(0.0, 0.95);
  QLearnConfig cfg = base_config(0.95, 20240901);
  const auto policy = train(env, WrapperConfig::none(), cfg);
  auto eval_env = make_ck(0.0, 0.95);
  const auto result = evaluate(eval_env, policy, 100, 1000, 0.95, 7);
  const double v_star = 56.32276485043269;  // frozen grid optimum at p ~ 0
  CHECK(result.mean >= 0.90 * v_star);
  CHECK(result.mean <= 1.02 * v_star);
}
