// Minimal simulator interface the Q-learner trains against, plus adapters
// for the two concrete environments. Environments own their latent state;
// all randomness comes through the caller's generator.
#pragma once

#include "amplify/choc_kale.hpp"
#include "amplify/slate.hpp"

namespace amplify {

class Env {
 public:
  virtual ~Env() = default;
  virtual int n_actions() const = 0;
  virtual int n_buckets() const = 0;
  virtual void reset() = 0;
  // One base event: executes the action, returns the raw reward.
  virtual double step(int action, Rng& rng) = 0;
  // Corrupted-satisfaction bucket for the current latent state.
  virtual int observe(Rng& rng) = 0;
  // Base events executed since the last reset.
  virtual long long events_taken() const = 0;
};

class CkEnv final : public Env {
 public:
  CkEnv(CKParams params, ObservationModel model) : params_(params), model_(model) {
    params_.validate();
    model_.validate();
  }

  int n_actions() const override { return 2; }
  int n_buckets() const override { return model_.n_buckets; }
  void reset() override {
    state_ = CKState{};
    events_ = 0;
  }
  double step(int action, Rng& rng) override {
    auto [next, reward] = ck_step(state_, action, params_, rng);
    state_ = next;
    ++events_;
    return reward;
  }
  int observe(Rng& rng) override { return ck_observe(state_, model_, params_, rng); }
  long long events_taken() const override { return events_; }

  const CKState& state() const { return state_; }
  const CKParams& params() const { return params_; }

 private:
  CKParams params_;
  ObservationModel model_;
  CKState state_;
  long long events_ = 0;
};

class SlateEnv final : public Env {
 public:
  SlateEnv(SlateParams params, ObservationModel model)
      : params_(std::move(params)), model_(model) {
    params_.validate();
    model_.validate();
    reset();
  }

  int n_actions() const override { return static_cast<int>(params_.targets.size()); }
  int n_buckets() const override { return model_.n_buckets; }
  void reset() override {
    state_ = SlateState{0.0, params_.initial_kaleness};
    events_ = 0;
  }
  double step(int action, Rng& rng) override {
    auto result = slate_step(state_, action, params_, rng);
    state_ = result.next;
    ++events_;
    return result.reward;
  }
  int observe(Rng& rng) override { return slate_observe(state_, model_, params_, rng); }
  long long events_taken() const override { return events_; }

  const SlateState& state() const { return state_; }
  const SlateParams& params() const { return params_; }

 private:
  SlateParams params_;
  ObservationModel model_;
  SlateState state_;
  long long events_ = 0;
};

}  // namespace amplify
