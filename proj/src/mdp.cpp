#include "amplify/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace amplify {

namespace {

constexpr double kRowSumTol = 1e-9;
constexpr long kMaxIterations = 100000000L;

void check_dims(const FiniteMDP& mdp, const QTable& q, const char* who) {
  if (q.n_states != mdp.n_states() || q.n_actions != mdp.n_actions())
    throw std::invalid_argument(std::string(who) + ": QTable dimensions do not match MDP");
}

}  // namespace

double QTable::state_value(int s) const {
  const auto r = row(s);
  return *std::max_element(r.begin(), r.end());
}

int QTable::greedy_action(int s) const {
  int best = 0;
  double best_q = at(s, 0);
  for (int a = 1; a < n_actions; ++a) {
    if (at(s, a) > best_q) {
      best_q = at(s, a);
      best = a;
    }
  }
  return best;
}

bool QTable::finite() const {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

double AdvantageProfile::max_advantage() const {
  double m = 0.0;
  for (const auto& s : per_state) m = std::max(m, s.advantage);
  return m;
}

FiniteMDP::FiniteMDP(int n_states, int n_actions, double gamma,
                     std::vector<double> transition, std::vector<double> reward)
    : n_states_(n_states), n_actions_(n_actions), gamma_(gamma),
      transition_(std::move(transition)), reward_(std::move(reward)) {
  if (n_states_ <= 0 || n_actions_ <= 0)
    throw std::invalid_argument("FiniteMDP: state and action counts must be positive");
  if (!(gamma_ >= 0.0) || gamma_ >= 1.0)
    throw std::invalid_argument("FiniteMDP: discount must lie in [0, 1)");
  const auto n = static_cast<std::size_t>(n_states_);
  const auto a = static_cast<std::size_t>(n_actions_);
  if (transition_.size() != n * a * n)
    throw std::invalid_argument("FiniteMDP: transition table has wrong size");
  if (reward_.size() != n * a)
    throw std::invalid_argument("FiniteMDP: reward table has wrong size");
  for (double v : reward_)
    if (!std::isfinite(v)) throw std::invalid_argument("FiniteMDP: non-finite reward");
  for (int s = 0; s < n_states_; ++s) {
    for (int act = 0; act < n_actions_; ++act) {
      double sum = 0.0;
      for (int next = 0; next < n_states_; ++next) {
        const double pv = p(s, act, next);
        if (!(pv >= 0.0) || !std::isfinite(pv))
          throw std::invalid_argument("FiniteMDP: negative or non-finite transition probability");
        sum += pv;
      }
      if (std::abs(sum - 1.0) > kRowSumTol)
        throw std::invalid_argument("FiniteMDP: transition row does not sum to 1");
    }
  }
}

double FiniteMDP::max_abs_reward() const {
  double m = 0.0;
  for (double v : reward_) m = std::max(m, std::abs(v));
  return m;
}

nlohmann::json FiniteMDP::to_json() const {
  nlohmann::json t = nlohmann::json::array();
  nlohmann::json r = nlohmann::json::array();
  for (int s = 0; s < n_states_; ++s) {
    nlohmann::json ts = nlohmann::json::array();
    nlohmann::json rs = nlohmann::json::array();
    for (int a = 0; a < n_actions_; ++a) {
      ts.push_back(transition_row(s, a));
      rs.push_back(this->r(s, a));
    }
    t.push_back(std::move(ts));
    r.push_back(std::move(rs));
  }
  return {{"n_states", n_states_},
          {"n_actions", n_actions_},
          {"gamma", gamma_},
          {"transition", std::move(t)},
          {"reward", std::move(r)}};
}

FiniteMDP FiniteMDP::from_json(const nlohmann::json& j) {
  const int n = j.at("n_states").get<int>();
  const int a = j.at("n_actions").get<int>();
  const double gamma = j.at("gamma").get<double>();
  const auto& jt = j.at("transition");
  const auto& jr = j.at("reward");
  if (static_cast<int>(jt.size()) != n || static_cast<int>(jr.size()) != n)
    throw std::invalid_argument("FiniteMDP::from_json: table row count mismatch");
  std::vector<double> transition;
  std::vector<double> reward;
  transition.reserve(static_cast<std::size_t>(n) * a * n);
  reward.reserve(static_cast<std::size_t>(n) * a);
  for (int s = 0; s < n; ++s) {
    if (static_cast<int>(jt[s].size()) != a || static_cast<int>(jr[s].size()) != a)
      throw std::invalid_argument("FiniteMDP::from_json: action column mismatch");
    for (int act = 0; act < a; ++act) {
      const auto& row = jt[s][act];
      if (static_cast<int>(row.size()) != n)
        throw std::invalid_argument("FiniteMDP::from_json: transition row length mismatch");
      for (const auto& v : row) transition.push_back(v.get<double>());
      reward.push_back(jr[s][act].get<double>());
    }
  }
  // constructor re-validates probabilities, rewards and discount
  return FiniteMDP(n, a, gamma, std::move(transition), std::move(reward));
}

// ---- exact solvers -----------------------------------------------------

namespace {

// Shared fixed-point loop; `backup_value(next_q, s)` supplies the value used
// to bootstrap a successor state.
template <typename ValueOf>
QTable iterate_to_fixpoint(const FiniteMDP& mdp, double tol, ValueOf&& value_of) {
  if (!(tol > 0.0)) throw std::invalid_argument("solver: tol must be positive");
  const int n = mdp.n_states();
  const int na = mdp.n_actions();
  QTable q(n, na, 0.0);
  QTable next(n, na, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  for (long iter = 0; iter < kMaxIterations; ++iter) {
    for (int s = 0; s < n; ++s) v[static_cast<std::size_t>(s)] = value_of(q, s);
    double diff = 0.0;
    for (int s = 0; s < n; ++s) {
      for (int a = 0; a < na; ++a) {
        double acc = 0.0;
        const auto row = mdp.transition_row(s, a);
        for (int sp = 0; sp < n; ++sp) acc += row[sp] * v[static_cast<std::size_t>(sp)];
        const double updated = mdp.r(s, a) + mdp.gamma() * acc;
        diff = std::max(diff, std::abs(updated - q.at(s, a)));
        next.at(s, a) = updated;
      }
    }
    std::swap(q, next);
    // contraction: residual of the returned table is <= gamma * diff <= tol
    if (diff <= tol) return q;
  }
  throw std::runtime_error("solver: iteration cap exceeded");
}

}  // namespace

QTable solve_q_star(const FiniteMDP& mdp, double tol) {
  return iterate_to_fixpoint(mdp, tol,
                             [](const QTable& q, int s) { return q.state_value(s); });
}

QTable policy_q(const FiniteMDP& mdp, const DeterministicPolicy& policy, double tol) {
  if (static_cast<int>(policy.action_of.size()) != mdp.n_states())
    throw std::invalid_argument("policy_q: policy is not total over states");
  for (int a : policy.action_of)
    if (a < 0 || a >= mdp.n_actions())
      throw std::invalid_argument("policy_q: action index out of range");
  return iterate_to_fixpoint(mdp, tol, [&policy](const QTable& q, int s) {
    return q.at(s, policy.action_of[static_cast<std::size_t>(s)]);
  });
}

double bellman_residual(const FiniteMDP& mdp, const QTable& q) {
  check_dims(mdp, q, "bellman_residual");
  double res = 0.0;
  for (int s = 0; s < mdp.n_states(); ++s) {
    for (int a = 0; a < mdp.n_actions(); ++a) {
      double acc = 0.0;
      const auto row = mdp.transition_row(s, a);
      for (int sp = 0; sp < mdp.n_states(); ++sp) acc += row[sp] * q.state_value(sp);
      res = std::max(res, std::abs(mdp.r(s, a) + mdp.gamma() * acc - q.at(s, a)));
    }
  }
  return res;
}

DeterministicPolicy greedy(const QTable& q) {
  DeterministicPolicy p;
  p.action_of.resize(static_cast<std::size_t>(q.n_states));
  for (int s = 0; s < q.n_states; ++s) p.action_of[static_cast<std::size_t>(s)] = q.greedy_action(s);
  return p;
}

AdvantageProfile advantages(const QTable& q) {
  if (q.n_actions < 2)
    throw std::invalid_argument("advantages: need at least two actions");
  AdvantageProfile out;
  out.per_state.resize(static_cast<std::size_t>(q.n_states));
  for (int s = 0; s < q.n_states; ++s) {
    const int best = q.greedy_action(s);
    int second = best == 0 ? 1 : 0;
    double second_q = q.at(s, second);
    for (int a = 0; a < q.n_actions; ++a) {
      if (a == best) continue;
      if (q.at(s, a) > second_q) {
        second_q = q.at(s, a);
        second = a;
      }
    }
    out.per_state[static_cast<std::size_t>(s)] = {best, second, q.at(s, best) - second_q};
  }
  return out;
}

// ---- reparameterizations ------------------------------------------------

FiniteMDP aggregate_mdp(const FiniteMDP& mdp, int k) {
  if (k < 1) throw std::invalid_argument("aggregate_mdp: k must be >= 1");
  const int n = mdp.n_states();
  const int na = mdp.n_actions();
  std::vector<double> transition(static_cast<std::size_t>(n) * na * n, 0.0);
  std::vector<double> reward(static_cast<std::size_t>(n) * na, 0.0);
  std::vector<double> dist(static_cast<std::size_t>(n));
  std::vector<double> next(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < na; ++a) {
      std::fill(dist.begin(), dist.end(), 0.0);
      dist[static_cast<std::size_t>(s)] = 1.0;
      double racc = 0.0;
      double disc = 1.0;
      for (int step = 0; step < k; ++step) {
        double er = 0.0;
        for (int i = 0; i < n; ++i) er += dist[static_cast<std::size_t>(i)] * mdp.r(i, a);
        racc += disc * er;
        disc *= mdp.gamma();
        std::fill(next.begin(), next.end(), 0.0);
        for (int i = 0; i < n; ++i) {
          const double di = dist[static_cast<std::size_t>(i)];
          if (di == 0.0) continue;
          const auto row = mdp.transition_row(i, a);
          for (int j = 0; j < n; ++j) next[static_cast<std::size_t>(j)] += di * row[j];
        }
        std::swap(dist, next);
      }
      reward[static_cast<std::size_t>(s) * na + a] = racc;
      double sum = 0.0;
      for (int j = 0; j < n; ++j) sum += dist[static_cast<std::size_t>(j)];
      // renormalize away accumulated rounding so construction validation holds
      for (int j = 0; j < n; ++j)
        transition[(static_cast<std::size_t>(s) * na + a) * n + j] =
            dist[static_cast<std::size_t>(j)] / sum;
    }
  }
  return FiniteMDP(n, na, std::pow(mdp.gamma(), k), std::move(transition), std::move(reward));
}

FiniteMDP switching_cost_mdp(const FiniteMDP& mdp, double cost) {
  if (!(cost >= 0.0)) throw std::invalid_argument("switching_cost_mdp: cost must be >= 0");
  const int n = mdp.n_states();
  const int na = mdp.n_actions();
  const ExtendedIndex idx{na};
  const int ne = n * na;
  std::vector<double> transition(static_cast<std::size_t>(ne) * na * ne, 0.0);
  std::vector<double> reward(static_cast<std::size_t>(ne) * na, 0.0);
  for (int b = 0; b < n; ++b) {
    for (int prev = 0; prev < na; ++prev) {
      const int e = idx.extended(b, prev);
      for (int a = 0; a < na; ++a) {
        reward[static_cast<std::size_t>(e) * na + a] =
            mdp.r(b, a) - (a != prev ? cost : 0.0);
        const auto row = mdp.transition_row(b, a);
        for (int bp = 0; bp < n; ++bp)
          transition[(static_cast<std::size_t>(e) * na + a) * ne + idx.extended(bp, a)] = row[bp];
      }
    }
  }
  return FiniteMDP(ne, na, mdp.gamma(), std::move(transition), std::move(reward));
}

// ---- diagnostics ---------------------------------------------------------

CounterfactualGap counterfactual_gap(const FiniteMDP& mdp,
                                     const DeterministicPolicy& pi,
                                     const DeterministicPolicy& rho, int start,
                                     int horizon, double tol) {
  if (start < 0 || start >= mdp.n_states())
    throw std::invalid_argument("counterfactual_gap: start state out of range");
  const double tail =
      std::pow(mdp.gamma(), horizon) * mdp.max_abs_reward() / (1.0 - mdp.gamma());
  if (tail > tol)
    throw std::invalid_argument(
        "counterfactual_gap: horizon too short for the requested tolerance");

  const QTable q_pi = policy_q(mdp, pi, tol);
  const QTable q_rho = policy_q(mdp, rho, tol);
  CounterfactualGap out;
  out.lhs = q_pi.at(start, pi.action_of[static_cast<std::size_t>(start)]) -
            q_rho.at(start, rho.action_of[static_cast<std::size_t>(start)]);

  const int n = mdp.n_states();
  std::vector<double> dist(static_cast<std::size_t>(n), 0.0);
  std::vector<double> next(static_cast<std::size_t>(n));
  dist[static_cast<std::size_t>(start)] = 1.0;
  double disc = 1.0;
  for (int t = 0; t < horizon; ++t) {
    double term = 0.0;
    for (int s = 0; s < n; ++s) {
      const double ds = dist[static_cast<std::size_t>(s)];
      if (ds == 0.0) continue;
      const int api = pi.action_of[static_cast<std::size_t>(s)];
      const int arho = rho.action_of[static_cast<std::size_t>(s)];
      term += ds * (q_pi.at(s, api) - q_pi.at(s, arho));
    }
    out.rhs += disc * term;
    disc *= mdp.gamma();
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < n; ++s) {
      const double ds = dist[static_cast<std::size_t>(s)];
      if (ds == 0.0) continue;
      const auto row = mdp.transition_row(s, rho.action_of[static_cast<std::size_t>(s)]);
      for (int sp = 0; sp < n; ++sp) next[static_cast<std::size_t>(sp)] += ds * row[sp];
    }
    std::swap(dist, next);
  }
  return out;
}

double smoothness(const FiniteMDP& mdp, const QTable& q) {
  check_dims(mdp, q, "smoothness");
  double worst = 0.0;
  for (int s = 0; s < mdp.n_states(); ++s) {
    for (int a = 0; a < mdp.n_actions(); ++a) {
      const auto row = mdp.transition_row(s, a);
      for (int sp = 0; sp < mdp.n_states(); ++sp) {
        if (row[sp] <= 0.0) continue;
        for (int aa = 0; aa < mdp.n_actions(); ++aa)
          worst = std::max(worst, std::abs(q.at(s, aa) - q.at(sp, aa)));
      }
    }
  }
  return worst;
}

double snr(const QTable& q, double epsilon, double r_max, double gamma) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("snr: epsilon must be >= 0");
  if (!(r_max > 0.0)) throw std::invalid_argument("snr: r_max must be positive");
  if (!(gamma >= 0.0) || gamma >= 1.0) throw std::invalid_argument("snr: gamma out of range");
  const AdvantageProfile prof = advantages(q);
  const double threshold = 2.0 * epsilon * r_max / ((1.0 - gamma) * (1.0 - gamma));
  double numerator = 0.0;
  double denominator = 0.0;
  bool any_qualifying = false;
  for (const auto& s : prof.per_state) {
    numerator = std::max(numerator, s.advantage);
    if (s.advantage <= threshold) {
      any_qualifying = true;
      denominator = std::max(denominator, s.advantage);
    }
  }
  if (denominator <= 0.0) {
    // all-zero profile with a qualifying state: ratio of equal sups is 1
    if (any_qualifying && numerator == 0.0) return 0.0;
    return std::numeric_limits<double>::infinity();
  }
  return numerator / denominator - 1.0;
}

}  // namespace amplify
