// Choc-Kale user simulator: a two-item recommender world where latent net
// positive exposure p drives sigmoidal satisfaction, satisfaction scales
// stochastic engagement, and Kale/Choc nudge p up/down. Also builds the
// discretized tabular oracle of the same dynamics.
#pragma once

#include "amplify/mdp.hpp"
#include "amplify/random.hpp"

namespace amplify {

// Action indices used everywhere: 0 = Choc (exposure -1), 1 = Kale (+1).
inline constexpr int kChoc = 0;
inline constexpr int kKale = 1;

struct CKParams {
  double beta = 0.9;        // exposure discount, [0, 1)
  double tau = 0.25;        // sigmoid temperature, > 0
  double mu_choc = 8.0;     // engagement scale, mu_choc > mu_kale > 0
  double mu_kale = 2.0;
  double sigma_choc = 0.5;  // engagement noise std, >= 0
  double sigma_kale = 0.5;
  double gamma = 0.99;      // RL discount, [0, 1)

  double p_bound() const { return 1.0 / (1.0 - beta); }
  void validate() const;
};

// Latent state: net positive exposure p in [-1/(1-beta), 1/(1-beta)].
struct CKState {
  double p = 0.0;
};

struct ObservationModel {
  double sigma_n = 0.0;  // satisfaction noise std, >= 0, truncated on [-1, 1]
  int n_buckets = 50;

  void validate() const;
};

// s(p) = 1 / (1 + exp(-tau * p)), in (0, 1).
double satisfaction(double p, double tau);

double exposure_direction(int action);  // -1 for Choc, +1 for Kale

struct CKStepResult {
  CKState next;
  double reward;
};

// Engagement is sampled at the pre-transition satisfaction, then p moves to
// beta*p + (+1 Kale / -1 Choc). The affine map keeps p inside its bound.
CKStepResult ck_step(CKState state, int action, const CKParams& params, Rng& rng);

// Corrupted-satisfaction bucket: clamp(s(p) + eta, 0, 1) with eta drawn from
// N(0, sigma_n^2) truncated to [-1, 1], floored into n_buckets.
int ck_observe(CKState state, const ObservationModel& model, const CKParams& params,
               Rng& rng);

int bucket_of_satisfaction(double s_tilde, int n_buckets);

// Uniform p-grid with n_buckets points; i in [0, n_buckets).
double ck_grid_point(const CKParams& params, int n_buckets, int i);
// Nearest grid index to an arbitrary p (half-up at midpoints).
int ck_grid_snap(const CKParams& params, int n_buckets, double p);

// Deterministic tabular stand-in: one-hot transitions onto the snapped grid,
// reward(s, a) = s(p) * mu_a, discount = params.gamma.
FiniteMDP build_discrete_mdp(const CKParams& params, int n_buckets);

}  // namespace amplify
