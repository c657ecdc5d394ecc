#include <cmath>
#include <vector>

#include "amplify/choc_kale.hpp"
#include "amplify/temporal.hpp"
#include "doctest.h"

using namespace amplify;

namespace {

// Single-bucket, single-action environment paying a constant reward.
class ConstEnv final : public Env {
 public:
  explicit ConstEnv(double reward) : reward_(reward) {}
  int n_actions() const override { return 2; }
  int n_buckets() const override { return 1; }
  void reset() override { events_ = 0; }
  double step(int, Rng&) override {
    ++events_;
    return reward_;
  }
  int observe(Rng&) override { return 0; }
  long long events_taken() const override { return events_; }

 private:
  double reward_;
  long long events_ = 0;
};

CkEnv make_ck(double sigma_n) {
  CKParams params;
  params.gamma = 0.95;
  return CkEnv(params, ObservationModel{sigma_n, 50});
}

}  // namespace

TEST_CASE("aggregate_step") {
  SUBCASE("k = 1 reproduces a bare step bit-for-bit") {
    auto base = make_ck(0.3);
    auto wrapped = make_ck(0.3);
    Rng r1(42), r2(42), actions(77);
    for (int t = 0; t < 200; ++t) {
      const int a = uniform_int(actions, 2);
      const double reward = base.step(a, r1);
      const int obs = base.observe(r1);
      const EnvStep step = aggregate_step(wrapped, a, 1, 0.95, r2);
      CHECK(step.reward == reward);
      CHECK(step.observation == obs);
      CHECK(step.events_elapsed == 1);
    }
  }
  SUBCASE("geometric reward sum for constant rewards") {
    ConstEnv env(1.0);
    Rng rng(1);
    const EnvStep step = aggregate_step(env, 0, 3, 0.9, rng);
    CHECK(step.reward == doctest::Approx(2.71).epsilon(1e-12));
    CHECK(step.events_elapsed == 3);
  }
  SUBCASE("two k = 5 calls consume exactly ten base events") {
    auto env = make_ck(0.3);
    env.reset();
    Rng rng(5);
    aggregate_step(env, kKale, 5, 0.95, rng);
    aggregate_step(env, kChoc, 5, 0.95, rng);
    CHECK(env.events_taken() == 10);
  }
  SUBCASE("rejects k = 0") {
    ConstEnv env(1.0);
    Rng rng(1);
    CHECK_THROWS_AS(aggregate_step(env, 0, 0, 0.9, rng), std::invalid_argument);
  }
}

TEST_CASE("switch_step") {
  SUBCASE("no switch leaves the reward untouched") {
    auto base = make_ck(0.0);
    auto wrapped = make_ck(0.0);
    Rng r1(9), r2(9);
    const double reward = base.step(kKale, r1);
    base.observe(r1);
    const EnvStep step = switch_step(wrapped, kKale, kKale, 3.0, r2);
    CHECK(step.reward == reward);
  }
  SUBCASE("zero cost never penalizes") {
    auto base = make_ck(0.2);
    auto wrapped = make_ck(0.2);
    Rng r1(9), r2(9);
    int prev = kChoc;
    for (int t = 0; t < 100; ++t) {
      const int a = t % 2;  // alternate every step
      const double reward = base.step(a, r1);
      const int obs = base.observe(r1);
      const EnvStep step = switch_step(wrapped, a, prev, 0.0, r2);
      CHECK(step.reward == reward);
      CHECK(step.observation == obs);
      prev = a;
    }
  }
  SUBCASE("a switch subtracts the cost from the raw reward") {
    auto base = make_ck(0.0);
    auto wrapped = make_ck(0.0);
    Rng r1(9), r2(9);
    const double reward = base.step(kKale, r1);
    base.observe(r1);
    const EnvStep step = switch_step(wrapped, kKale, kChoc, 2.0, r2);
    CHECK(step.reward == doctest::Approx(reward - 2.0).epsilon(1e-15));
  }
  SUBCASE("matches the extended-MDP reward table on the discretized chain") {
    CKParams params;
    params.gamma = 0.95;
    const auto mdp = build_discrete_mdp(params, 50);
    const double cost = 2.0;
    const auto ext = switching_cost_mdp(mdp, cost);
    const ExtendedIndex idx{2};
    for (int b = 0; b < 50; ++b)
      for (int prev = 0; prev < 2; ++prev)
        for (int a = 0; a < 2; ++a)
          CHECK(ext.r(idx.extended(b, prev), a) ==
                doctest::Approx(mdp.r(b, a) - (a != prev ? cost : 0.0)).epsilon(1e-13));
  }
}

TEST_CASE("penalized_return_decomposition") {
  SUBCASE("no switches, no penalty") {
    const std::vector<SwitchRecord> traj = {{1, 2.0}, {1, 3.0}, {1, 1.0}};
    const auto d = penalized_return_decomposition(traj, 5.0, 0.9);
    CHECK(d.penalty_paid == doctest::Approx(0.0));
    CHECK(d.raw_return == doctest::Approx(2.0 + 0.9 * 3.0 + 0.81 * 1.0));
    CHECK(d.penalized() == doctest::Approx(d.raw_return));
  }
  SUBCASE("alternating actions against an explicit previous action") {
    // three steps, each switching relative to its predecessor
    const std::vector<SwitchRecord> traj = {{1, 0.0}, {0, 0.0}, {1, 0.0}};
    const auto d = penalized_return_decomposition(traj, 1.0, 0.9, 0);
    CHECK(d.penalty_paid == doctest::Approx(1.0 + 0.9 + 0.81).epsilon(1e-12));
  }
  SUBCASE("episode start: the first action is never a switch") {
    const std::vector<SwitchRecord> traj = {{1, 0.0}, {0, 0.0}, {1, 0.0}};
    const auto d = penalized_return_decomposition(traj, 1.0, 0.9);
    CHECK(d.penalty_paid == doctest::Approx(0.9 + 0.81).epsilon(1e-12));
  }
  SUBCASE("zero cost decomposes trivially") {
    const std::vector<SwitchRecord> traj = {{1, 2.0}, {0, -1.0}};
    const auto d = penalized_return_decomposition(traj, 0.0, 0.9);
    CHECK(d.penalty_paid == doctest::Approx(0.0));
    CHECK(d.penalized() == doctest::Approx(d.raw_return));
  }
}

TEST_CASE("event accounting under aggregation") {
  // a fixed base-event budget is exactly conserved: 30000 events = 6000
  // five-step aggregated decisions
  auto env = make_ck(0.3);
  env.reset();
  Rng rng(21);
  long long steps = 0;
  long long events = 0;
  while (events < 30000) {
    const EnvStep step = aggregate_step(env, uniform_int(rng, 2), 5, 0.95, rng);
    events += step.events_elapsed;
    ++steps;
  }
  CHECK(steps == 6000);
  CHECK(events == 30000);
  CHECK(env.events_taken() == 30000);
}
