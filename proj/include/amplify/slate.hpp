// Continuous-kaleness slate environment: items carry scores in [0, 1], the
// agent sets a target score, and the user picks softmax-near-target. The
// consumed score drives the same exposure/satisfaction dynamics as the
// binary model, with engagement interpolated linearly between the Choc and
// Kale endpoints.
#pragma once

#include <span>
#include <vector>

#include "amplify/choc_kale.hpp"
#include "amplify/random.hpp"

namespace amplify {

struct SlateParams {
  int n_items = 7;
  double lambda = 0.2;    // choice softmax temperature, > 0
  double item_std = 0.3;  // item-draw truncated-Gaussian std
  std::vector<double> targets = {0.0, 0.25, 0.5, 0.75, 1.0};  // strictly increasing in [0,1]
  CKParams ck;
  double initial_kaleness = 0.5;  // anchor of the first slate draw

  void validate() const;
};

struct SlateState {
  double p = 0.0;
  double last_kaleness = 0.5;  // score of the previously consumed item
};

// n_items independent draws from N(last_kaleness, item_std^2) truncated to
// [0, 1].
std::vector<double> draw_slate(const SlateState& state, const SlateParams& params,
                               Rng& rng);

// P(i) proportional to exp(-|v(i) - theta| / lambda), max-shifted.
std::vector<double> choice_probabilities(std::span<const double> slate, double theta,
                                         double lambda);
int user_choice(std::span<const double> slate, double theta, double lambda, Rng& rng);

struct SlateStepResult {
  SlateState next;
  double reward;
  double consumed_score;
};

// Consumed score v maps to exposure increment 2v - 1 and engagement mean
// v * mu_kale + (1 - v) * mu_choc at the pre-transition satisfaction, so the
// v = 0 / v = 1 endpoints reproduce binary Choc / Kale exactly.
SlateStepResult slate_step(const SlateState& state, int target_index,
                           const SlateParams& params, Rng& rng);

// Same corrupted-satisfaction bucketing as the binary model.
int slate_observe(const SlateState& state, const ObservationModel& model,
                  const SlateParams& params, Rng& rng);

}  // namespace amplify
