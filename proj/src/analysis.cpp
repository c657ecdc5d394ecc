#include "amplify/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace amplify {

namespace {

constexpr double kInvE = 0.36787944117144232;  // 1/e

void check_gamma(double gamma, const char* who) {
  if (!(gamma > 0.0) || gamma >= 1.0)
    throw std::invalid_argument(std::string(who) + ": gamma must lie in (0, 1)");
}

void check_nonneg(double v, const char* who, const char* what) {
  if (!(v >= 0.0))
    throw std::invalid_argument(std::string(who) + ": " + what + " must be >= 0");
}

// Halley iteration on f(w) = w*e^w - x from a branch-appropriate initial
// guess; converges to full double precision in a handful of steps.
double halley(double x, double w) {
  for (int i = 0; i < 200; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double fp = ew * (w + 1.0);
    const double fpp = ew * (w + 2.0);
    const double denom = fp - 0.5 * f * fpp / fp;
    const double next = w - f / denom;
    if (!std::isfinite(next)) break;
    if (std::abs(next - w) <= 1e-16 * std::max(1.0, std::abs(next))) {
      w = next;
      break;
    }
    w = next;
  }
  return w;
}

// Series around the branch point x = -1/e, p = +/-sqrt(2(1 + e*x)).
double branch_point_series(double p) {
  return -1.0 + p * (1.0 - p * (1.0 / 3.0 - p * (11.0 / 72.0)));
}

}  // namespace

double statistic_loss_bound(double epsilon, double r_max, double gamma) {
  check_gamma(gamma, "statistic_loss_bound");
  check_nonneg(epsilon, "statistic_loss_bound", "epsilon");
  if (!(r_max > 0.0)) throw std::invalid_argument("statistic_loss_bound: r_max must be positive");
  const double om = 1.0 - gamma;
  return 2.0 * epsilon * r_max / (om * om * om);
}

double q_error_bound(double epsilon, double r_max, double gamma) {
  check_gamma(gamma, "q_error_bound");
  check_nonneg(epsilon, "q_error_bound", "epsilon");
  if (!(r_max > 0.0)) throw std::invalid_argument("q_error_bound: r_max must be positive");
  const double om = 1.0 - gamma;
  return epsilon * r_max / (om * om);
}

double aggregation_value_loss_bound(int k, double smooth_l, double gamma) {
  check_gamma(gamma, "aggregation_value_loss_bound");
  check_nonneg(smooth_l, "aggregation_value_loss_bound", "L");
  if (k < 1) throw std::invalid_argument("aggregation_value_loss_bound: k must be >= 1");
  return 2.0 * k * smooth_l / (1.0 - gamma);
}

double lossless_amplification_lower(double advantage, int k, double smooth_l, double gamma) {
  check_gamma(gamma, "lossless_amplification_lower");
  check_nonneg(smooth_l, "lossless_amplification_lower", "L");
  check_nonneg(advantage, "lossless_amplification_lower", "advantage");
  if (k < 1) throw std::invalid_argument("lossless_amplification_lower: k must be >= 1");
  if (advantage < 2.0 * k * smooth_l)
    throw std::invalid_argument("lossless_amplification_lower: requires advantage >= 2kL");
  const double om = 1.0 - gamma;
  const double gk = std::pow(gamma, k);
  return advantage * (1.0 - gk) / om -
         2.0 * gamma * smooth_l * (1.0 - (1.0 + k - gamma * k) * gk) / (om * om);
}

double aggregate_advantage_lower(double advantage, int k, double smooth_l, double gamma) {
  return lossless_amplification_lower(advantage, k, smooth_l, gamma) -
         2.0 * k * smooth_l / (1.0 - gamma);
}

double eps_max(int k, double smooth_l, double gamma, double r_max) {
  check_gamma(gamma, "eps_max");
  check_nonneg(smooth_l, "eps_max", "L");
  if (k < 1) throw std::invalid_argument("eps_max: k must be >= 1");
  if (!(r_max > 0.0)) throw std::invalid_argument("eps_max: r_max must be positive");
  const double gk = std::pow(gamma, k);
  const double raw = k * (gamma - gk) - gamma * (1.0 - (1.0 + k - gamma * k) * gk);
  return std::max(0.0, smooth_l * raw / r_max);
}

double lambert_w(double x) {
  if (!(x >= -kInvE))
    throw std::domain_error("lambert_w: argument below -1/e");
  if (x == 0.0) return 0.0;
  double w;
  const double near_branch = 2.0 * (1.0 + std::exp(1.0) * x);
  if (near_branch < 0.25) {
    w = branch_point_series(std::sqrt(std::max(0.0, near_branch)));
  } else if (x < 1.0) {
    w = x / (1.0 + x);  // crude but inside the Halley basin
  } else {
    const double lx = std::log(x);
    w = lx - std::log(lx > 1.0 ? lx : 1.0);
  }
  return halley(x, w);
}

double lambert_w_lower(double x) {
  if (!(x >= -kInvE))
    throw std::domain_error("lambert_w_lower: argument below -1/e");
  if (!(x < 0.0))
    throw std::domain_error("lambert_w_lower: argument must be negative");
  double w;
  const double near_branch = 2.0 * (1.0 + std::exp(1.0) * x);
  if (near_branch < 0.25) {
    w = branch_point_series(-std::sqrt(std::max(0.0, near_branch)));
  } else {
    const double l1 = std::log(-x);
    w = l1 - std::log(-l1);
  }
  return halley(x, w);
}

double switching_horizon(double gamma, double smooth_l, double cost) {
  check_gamma(gamma, "switching_horizon");
  check_nonneg(cost, "switching_horizon", "cost");
  if (!(smooth_l > 0.0)) throw std::invalid_argument("switching_horizon: L must be positive");
  const double log_g = std::log(gamma);
  const double c = (1.0 - gamma) * (1.0 - gamma) * cost / (2.0 * gamma * smooth_l) - 1.0;
  // gamma^{1/(1-gamma)} / (gamma - 1) * c * log(gamma), written to avoid
  // cancellation: u = -log(gamma)/(1-gamma) > 1, coefficient = u * e^{-u}.
  const double u = -log_g / (1.0 - gamma);
  const double arg = u * std::exp(-u) * c;
  if (arg < -kInvE)
    throw std::domain_error("switching_horizon: Lambert argument below the branch point");
  if (arg >= 0.0)
    throw std::domain_error(
        "switching_horizon: cost >= 2*gamma*L/(1-gamma)^2, no finite switching horizon");
  const double w = lambert_w_lower(arg);
  return (log_g + (gamma - 1.0) * w) / ((gamma - 1.0) * log_g);
}

double switching_regret_bound(double gamma, double smooth_l, double cost) {
  check_gamma(gamma, "switching_regret_bound");
  check_nonneg(smooth_l, "switching_regret_bound", "L");
  if (smooth_l == 0.0) return 0.0;
  return 2.0 * switching_horizon(gamma, smooth_l, cost) * smooth_l / (1.0 - gamma);
}

double switching_amplification_threshold(double gamma, double smooth_l, double cost) {
  check_gamma(gamma, "switching_amplification_threshold");
  check_nonneg(smooth_l, "switching_amplification_threshold", "L");
  if (smooth_l == 0.0) return 0.0;
  return (1.0 + 1.0 / (1.0 - gamma)) * 2.0 * switching_horizon(gamma, smooth_l, cost) * smooth_l;
}

}  // namespace amplify
