#include "amplify/choc_kale.hpp"

#include <cmath>
#include <stdexcept>

namespace amplify {

void CKParams::validate() const {
  if (!(beta >= 0.0) || beta >= 1.0)
    throw std::invalid_argument("CKParams: beta must lie in [0, 1)");
  if (!(tau > 0.0)) throw std::invalid_argument("CKParams: tau must be positive");
  if (!(mu_kale > 0.0) || !(mu_choc > mu_kale))
    throw std::invalid_argument("CKParams: require mu_choc > mu_kale > 0");
  if (sigma_choc < 0.0 || sigma_kale < 0.0)
    throw std::invalid_argument("CKParams: engagement noise std must be >= 0");
  if (!(gamma >= 0.0) || gamma >= 1.0)
    throw std::invalid_argument("CKParams: gamma must lie in [0, 1)");
}

void ObservationModel::validate() const {
  if (sigma_n < 0.0) throw std::invalid_argument("ObservationModel: sigma_n must be >= 0");
  if (n_buckets < 2) throw std::invalid_argument("ObservationModel: need at least 2 buckets");
}

double satisfaction(double p, double tau) { return 1.0 / (1.0 + std::exp(-tau * p)); }

double exposure_direction(int action) {
  switch (action) {
    case kChoc: return -1.0;
    case kKale: return +1.0;
    default: throw std::invalid_argument("exposure_direction: unknown action");
  }
}

CKStepResult ck_step(CKState state, int action, const CKParams& params, Rng& rng) {
  const double s = satisfaction(state.p, params.tau);
  const double mu = action == kKale ? params.mu_kale : params.mu_choc;
  const double sigma = action == kKale ? params.sigma_kale : params.sigma_choc;
  CKStepResult out;
  out.reward = sample_normal(rng, s * mu, sigma);
  out.next.p = params.beta * state.p + exposure_direction(action);
  return out;
}

int bucket_of_satisfaction(double s_tilde, int n_buckets) {
  const int b = static_cast<int>(std::floor(s_tilde * n_buckets));
  return std::min(std::max(b, 0), n_buckets - 1);
}

int ck_observe(CKState state, const ObservationModel& model, const CKParams& params,
               Rng& rng) {
  const double s = satisfaction(state.p, params.tau);
  const double eta =
      model.sigma_n == 0.0 ? 0.0 : truncated_normal(rng, 0.0, model.sigma_n, -1.0, 1.0);
  const double corrupted = std::clamp(s + eta, 0.0, 1.0);
  return bucket_of_satisfaction(corrupted, model.n_buckets);
}

double ck_grid_point(const CKParams& params, int n_buckets, int i) {
  const double bound = params.p_bound();
  return -bound + 2.0 * bound * i / (n_buckets - 1);
}

int ck_grid_snap(const CKParams& params, int n_buckets, double p) {
  const double bound = params.p_bound();
  const double step = 2.0 * bound / (n_buckets - 1);
  // The dynamics produce exact midpoint targets (e.g. beta = 0.9 on a
  // 50-point grid); the epsilon makes the half-up tie-break immune to
  // rounding in the index arithmetic.
  const int i = static_cast<int>(std::floor((p + bound) / step + 0.5 + 1e-9));
  return std::min(std::max(i, 0), n_buckets - 1);
}

FiniteMDP build_discrete_mdp(const CKParams& params, int n_buckets) {
  params.validate();
  if (n_buckets < 2) throw std::invalid_argument("build_discrete_mdp: need >= 2 buckets");
  const int n = n_buckets;
  std::vector<double> transition(static_cast<std::size_t>(n) * 2 * n, 0.0);
  std::vector<double> reward(static_cast<std::size_t>(n) * 2, 0.0);
  for (int i = 0; i < n; ++i) {
    const double p = ck_grid_point(params, n, i);
    const double s = satisfaction(p, params.tau);
    for (int a = 0; a < 2; ++a) {
      const int j = ck_grid_snap(params, n, params.beta * p + exposure_direction(a));
      transition[(static_cast<std::size_t>(i) * 2 + a) * n + j] = 1.0;
      reward[static_cast<std::size_t>(i) * 2 + a] =
          s * (a == kKale ? params.mu_kale : params.mu_choc);
    }
  }
  return FiniteMDP(n, 2, params.gamma, std::move(transition), std::move(reward));
}

}  // namespace amplify
