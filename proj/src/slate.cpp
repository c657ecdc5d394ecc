#include "amplify/slate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace amplify {

void SlateParams::validate() const {
  ck.validate();
  if (n_items < 1) throw std::invalid_argument("SlateParams: need at least one item");
  if (!(lambda > 0.0)) throw std::invalid_argument("SlateParams: lambda must be positive");
  if (item_std < 0.0) throw std::invalid_argument("SlateParams: item_std must be >= 0");
  if (targets.empty()) throw std::invalid_argument("SlateParams: targets must be nonempty");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0.0 || targets[i] > 1.0)
      throw std::invalid_argument("SlateParams: targets must lie in [0, 1]");
    if (i > 0 && !(targets[i] > targets[i - 1]))
      throw std::invalid_argument("SlateParams: targets must be strictly increasing");
  }
  if (initial_kaleness < 0.0 || initial_kaleness > 1.0)
    throw std::invalid_argument("SlateParams: initial_kaleness must lie in [0, 1]");
}

std::vector<double> draw_slate(const SlateState& state, const SlateParams& params,
                               Rng& rng) {
  std::vector<double> slate(static_cast<std::size_t>(params.n_items));
  for (auto& v : slate)
    v = truncated_normal(rng, state.last_kaleness, params.item_std, 0.0, 1.0);
  return slate;
}

std::vector<double> choice_probabilities(std::span<const double> slate, double theta,
                                         double lambda) {
  if (slate.empty()) throw std::invalid_argument("choice_probabilities: empty slate");
  std::vector<double> logits(slate.size());
  double max_logit = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < slate.size(); ++i) {
    logits[i] = -std::abs(slate[i] - theta) / lambda;
    max_logit = std::max(max_logit, logits[i]);
  }
  double total = 0.0;
  for (auto& l : logits) {
    l = std::exp(l - max_logit);
    total += l;
  }
  for (auto& l : logits) l /= total;
  return logits;
}

int user_choice(std::span<const double> slate, double theta, double lambda, Rng& rng) {
  const auto probs = choice_probabilities(slate, theta, lambda);
  const double u = uniform_unit(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;  // guard against rounding in acc
}

SlateStepResult slate_step(const SlateState& state, int target_index,
                           const SlateParams& params, Rng& rng) {
  if (target_index < 0 || target_index >= static_cast<int>(params.targets.size()))
    throw std::invalid_argument("slate_step: target index out of range");
  const double theta = params.targets[static_cast<std::size_t>(target_index)];
  const auto slate = draw_slate(state, params, rng);
  const int chosen = user_choice(slate, theta, params.lambda, rng);
  const double v = slate[static_cast<std::size_t>(chosen)];

  const double s = satisfaction(state.p, params.ck.tau);
  const double mu = v * params.ck.mu_kale + (1.0 - v) * params.ck.mu_choc;
  SlateStepResult out;
  out.consumed_score = v;
  out.reward = sample_normal(rng, s * mu, params.ck.sigma_kale);
  out.next.p = params.ck.beta * state.p + (2.0 * v - 1.0);
  out.next.last_kaleness = v;
  return out;
}

int slate_observe(const SlateState& state, const ObservationModel& model,
                  const SlateParams& params, Rng& rng) {
  const CKState ck_state{state.p};
  return ck_observe(ck_state, model, params.ck, rng);
}

}  // namespace amplify
