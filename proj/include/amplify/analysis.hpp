// Closed-form quantities behind the temporal-abstraction guarantees:
// value-loss and advantage lower bounds for k-step action repetition, the
// switching-cost horizon switching_horizon (via Lambert W), and the derived regret and
// amplification thresholds.
#pragma once

namespace amplify {

// Collected inputs accepted by the bound calculators; used by the CLI.
struct BoundInputs {
  double gamma = 0.0;    // discount, (0, 1)
  double smooth_l = 0.0; // per-transition Q drift bound L, >= 0
  int k = 1;             // repetition horizon, >= 1
  double cost = 0.0;     // switching cost, >= 0
  double r_max = 1.0;    // max |reward|, > 0
  double epsilon = 0.0;  // statistic sufficiency, >= 0
  double advantage = 0.0;// event-level advantage A(b), >= 0
};

// 2*eps*r_max/(1-gamma)^3 - value loss of planning on an eps-sufficient
// statistic.
double statistic_loss_bound(double epsilon, double r_max, double gamma);

// eps*r_max/(1-gamma)^2 - per-pair Q estimation error bound.
double q_error_bound(double epsilon, double r_max, double gamma);

// 2kL/(1-gamma) - value loss of the best k-repetition policy.
double aggregation_value_loss_bound(int k, double smooth_l, double gamma);

// Lossless amplification lower bound, valid when advantage >= 2kL:
//   A(1-g^k)/(1-g) - 2gL(1-(1+k-gk)g^k)/(1-g)^2.
double lossless_amplification_lower(double advantage, int k, double smooth_l, double gamma);

// Amplified advantage lower bound for a globally fixed horizon k
// (lossless_amplification_lower minus the 2kL/(1-g) aggregation loss); valid when
// advantage >= 2kL.
double aggregate_advantage_lower(double advantage, int k, double smooth_l, double gamma);

// Largest statistic error a k-aggregation can absorb:
//   max(0, L * (k(g-g^k) - g(1-(1+k-gk)g^k)) / r_max).
// The raw expression is slightly negative at k=1 (no headroom without
// aggregation); it is clamped at zero since epsilon is a nonnegative budget.
double eps_max(int k, double smooth_l, double gamma, double r_max);

// Principal real branch W0: w*e^w = x for x >= -1/e, w >= -1.
// Residual |w*e^w - x| <= 1e-12 * max(1, |x|).
double lambert_w(double x);

// Lower real branch W-1: w*e^w = x for x in [-1/e, 0), w <= -1.
double lambert_w_lower(double x);

// Implicit switching horizon: the root of
//   2*gamma*L*(1 + k*g^{k+1} - (1+k)*g^k)/(1-g)^2 = cost
// in closed form. The root lies on the lower W branch (the principal branch
// produces a negative horizon). Throws std::domain_error when
// cost >= 2*gamma*L/(1-gamma)^2 (no finite horizon) or the W argument falls
// below the branch point.
double switching_horizon(double gamma, double smooth_l, double cost);

// 2*switching_horizon*L/(1-gamma); 0 when L == 0 (the trivial limit).
double switching_regret_bound(double gamma, double smooth_l, double cost);

// (1 + 1/(1-gamma)) * 2*switching_horizon*L: event-level advantage above this threshold
// guarantees an extended advantage of at least 2*cost. 0 when L == 0.
double switching_amplification_threshold(double gamma, double smooth_l, double cost);

}  // namespace amplify
