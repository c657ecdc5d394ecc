// Acceptance suite: every release gate runs here, one pass/fail line per
// criterion, nonzero exit if any gate fails. Thresholds and tolerances are
// pinned in this file, not configurable.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "amplify/choc_kale.hpp"
#include "amplify/experiment.hpp"
#include "amplify/qlearn.hpp"
#include "amplify/verify.hpp"

using namespace amplify;

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kSeed = 20240901;
int g_failures = 0;

void report(int criterion, bool passed, const std::string& details, double seconds) {
  if (!passed) ++g_failures;
  std::printf("[%s] criterion %d: %s (%.1f s)\n", passed ? "PASS" : "FAIL", criterion,
              details.c_str(), seconds);
  std::fflush(stdout);
}

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0,
                double d = 0.0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

// criterion 1: counterfactual identity on 50 random MDPs, < 10 s
void criterion_1() {
  const auto t0 = Clock::now();
  const auto res = check_counterfactual_identity(kSeed, 50);
  const double secs = since(t0);
  report(1, res.passed && secs < 10.0,
         "counterfactual value identity; " + res.details, secs);
}

// criterion 2: aggregation value-loss bound on the 50-bucket chain, < 30 s
void criterion_2() {
  const auto t0 = Clock::now();
  const auto res = check_aggregation_value_loss();
  const double secs = since(t0);
  report(2, res.passed && secs < 30.0, "k-aggregation value-loss bound; " + res.details,
         secs);
}

// criterion 3: amplification lower bound plus the exact formula identity
void criterion_3() {
  const auto t0 = Clock::now();
  const auto res = check_amplification_lower_bound();
  std::string details = "aggregated-advantage lower bound; " + res.details;
  if (res.vacuous)
    details += " [no chain state clears A >= 2kL: bound vacuously satisfied there,"
               " exercised on the smooth ring]";
  report(3, res.passed, details, since(t0));
}

// criterion 4: closed-form switching horizon vs bisection, W residuals
void criterion_4() {
  const auto t0 = Clock::now();
  const auto kap = check_switching_horizon_oracle();
  const auto lam = check_lambert_residuals();
  report(4, kap.passed && lam.passed, kap.details + "; " + lam.details, since(t0));
}

// criterion 5: switching amplification threshold
void criterion_5() {
  const auto t0 = Clock::now();
  const auto res = check_switching_amplification();
  std::string details = "switching-cost amplification; " + res.details;
  if (res.vacuous)
    details += " [no chain state clears the threshold for T in {1,2,3}: vacuous there,"
               " exercised on the smooth ring]";
  report(5, res.passed, details, since(t0));
}

// criterion 6: k = 1 and T = 0 wrappers change nothing
void criterion_6() {
  const auto t0 = Clock::now();
  const auto res = check_wrapper_identities(kSeed);
  report(6, res.passed, "wrapper identities; " + res.details, since(t0));
}

SweepConfig experiment_config() {
  SweepConfig config;
  config.master_seed = kSeed;
  return config;
}

std::map<std::pair<std::string, double>, double> cell_means(
    const std::vector<MetricRow>& rows) {
  std::map<std::pair<std::string, double>, double> sums;
  std::map<std::pair<std::string, double>, int> counts;
  for (const auto& r : rows) {
    sums[{r.wrapper, r.sigma_n}] += r.mean_return;
    ++counts[{r.wrapper, r.sigma_n}];
  }
  for (auto& [key, value] : sums) value /= counts[key];
  return sums;
}

// criterion 7: high-noise aggregation advantage at gamma = 0.99, < 10 min
void criterion_7() {
  const auto t0 = Clock::now();
  SweepConfig config = experiment_config();
  config.wrappers = {WrapperConfig::none(), WrapperConfig::aggregate(5)};
  config.gammas = {0.99};
  config.sigma_grid = {0.4, 0.5};
  const auto rows = run_sweep(config, 0, nullptr, nullptr);
  const auto means = cell_means(rows);
  const double r04 = means.at({"agg_k5", 0.4}) / means.at({"none", 0.4});
  const double r05 = means.at({"agg_k5", 0.5}) / means.at({"none", 0.5});
  const double secs = since(t0);
  report(7, r04 >= 1.4 && r05 >= 1.4 && secs < 600.0,
         fmt("aggregation-trained mean return over 10 seeds vs event-level: "
             "%.2fx at sigma_n=0.4, %.2fx at sigma_n=0.5 (need >= 1.40x each)",
             r04, r05),
         secs);
}

// criterion 8: Q-value panel properties at gamma = 0.99
void criterion_8() {
  const auto t0 = Clock::now();
  CKParams params;
  params.gamma = 0.99;
  const double tol = 1e-8;
  const auto mdp = build_discrete_mdp(params, 50);
  const auto q = solve_q_star(mdp, tol);

  // (a) exactly one Kale -> Choc crossover in satisfaction
  int crossings = 0;
  int prev_sign = 0;
  for (int s = 0; s < 50; ++s) {
    const double d = q.at(s, kChoc) - q.at(s, kKale);
    const int sign = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (sign != 0 && prev_sign != 0 && sign != prev_sign) ++crossings;
    if (sign != 0) prev_sign = sign;
  }
  const bool crossover_ok =
      crossings == 1 && q.at(0, kKale) > q.at(0, kChoc) && q.at(49, kChoc) > q.at(49, kKale);

  // (b) aggregated advantage dominates wherever A >= 2kL (vacuous on this
  //     chain: advantages sit far below 2kL, reported as such)
  const int k = 5;
  const double l_emp = smoothness(mdp, q);
  const auto prof = advantages(q);
  const auto qk = solve_q_star(aggregate_mdp(mdp, k), tol);
  int qualifying = 0;
  bool dominance_ok = true;
  for (int b = 0; b < 50; ++b) {
    const auto& st = prof.per_state[static_cast<std::size_t>(b)];
    if (st.advantage < 2.0 * k * l_emp) continue;
    ++qualifying;
    if (qk.at(b, st.best_action) - qk.at(b, st.second_action) <
        st.advantage - 2.0 * tol)
      dominance_ok = false;
  }

  // (c) at sigma_n = 0.3 the between-run spread of event-level Q estimates
  //     dwarfs the true mid-satisfaction gap (buckets with centers in
  //     [0.4, 0.6] vs the exact gap at the state nearest s = 0.5)
  SweepConfig config = experiment_config();
  std::vector<QTable> tables;
  for (int run = 0; run < 10; ++run)
    tables.push_back(train_cell(config, WrapperConfig::none(), 0.99, 0.3, run).q);
  const int mid_state = ck_grid_snap(params, 50, 0.0);  // s = 0.5
  const double gap_ref = std::abs(q.at(mid_state, kChoc) - q.at(mid_state, kKale));
  double min_std = 1e300;
  for (int b = 20; b < 30; ++b) {
    for (int a = 0; a < 2; ++a) {
      double mean = 0.0;
      for (const auto& t : tables) mean += t.at(b, a);
      mean /= 10.0;
      double var = 0.0;
      for (const auto& t : tables) var += (t.at(b, a) - mean) * (t.at(b, a) - mean);
      min_std = std::min(min_std, std::sqrt(var / 9.0));
    }
  }
  const bool noise_ok = min_std >= 5.0 * gap_ref;

  std::string details =
      fmt("crossovers = %.0f (need exactly 1, Kale low / Choc high)",
          static_cast<double>(crossings)) +
      fmt("; states with A >= 2kL = %.0f (2kL = %.1f, max A = %.2f)",
          static_cast<double>(qualifying), 2.0 * k * l_emp, prof.max_advantage()) +
      (qualifying == 0 ? " [dominance vacuous]" : "") +
      fmt("; min between-run Q std over mid buckets = %.2f vs 5x mid gap = %.2f",
          min_std, 5.0 * gap_ref);
  report(8, crossover_ok && dominance_ok && noise_ok, details, since(t0));
}

// criterion 9: orderings the sweep must reproduce; absolute curves are out
// of reach by design, so the gate is the existence claims
void criterion_9() {
  const auto t0 = Clock::now();
  SweepConfig config = experiment_config();
  config.wrappers = {WrapperConfig::none(), WrapperConfig::switching(1.0),
                     WrapperConfig::switching(2.0), WrapperConfig::switching(3.0)};
  config.gammas = {0.95, 0.99};
  config.sigma_grid = {0.1, 0.2, 0.3, 0.4, 0.5};

  std::map<std::tuple<std::string, double, double>, double> sums;
  std::map<std::tuple<std::string, double, double>, int> counts;
  const auto rows = run_sweep(config, 0, nullptr, nullptr);
  for (const auto& r : rows) {
    sums[{r.wrapper, r.gamma, r.sigma_n}] += r.mean_return;
    ++counts[{r.wrapper, r.gamma, r.sigma_n}];
  }
  for (auto& [key, value] : sums) value /= counts[key];

  bool regularization_helps = false;
  bool over_regularization_hurts = false;
  double best_gain = 0.0, worst_drop = 0.0;
  for (const double gamma : config.gammas) {
    for (const double sigma : config.sigma_grid) {
      const double none = sums.at({"none", gamma, sigma});
      double best_small = none;
      for (const std::string w : {"switch_t1", "switch_t2"})
        best_small = std::max(best_small, sums.at({w, gamma, sigma}));
      for (const std::string w : {"switch_t1", "switch_t2", "switch_t3"}) {
        const double gain = sums.at({w, gamma, sigma}) - none;
        if (gain > 0.0) regularization_helps = true;
        best_gain = std::max(best_gain, gain);
      }
      const double drop = best_small - sums.at({"switch_t3", gamma, sigma});
      if (drop > 0.0) over_regularization_hurts = true;
      worst_drop = std::max(worst_drop, drop);
    }
  }
  report(9, regularization_helps && over_regularization_hurts,
         fmt("switching-cost orderings over the sweep grid: some T > 0 beats T = 0 "
             "(best gain %.2f) and the largest T trails a smaller setting somewhere "
             "(max shortfall %.2f); absolute curves intentionally not matched",
             best_gain, worst_drop),
         since(t0));
}

}  // namespace

int main() {
  std::printf("acceptance suite (seed %llu)\n", static_cast<unsigned long long>(kSeed));
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  if (g_failures == 0) {
    std::printf("all 9 criteria passed\n");
    return 0;
  }
  std::printf("%d criteria FAILED\n", g_failures);
  return 1;
}
