#include "amplify/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <condition_variable>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "amplify/choc_kale.hpp"
#include "amplify/env.hpp"

namespace amplify {

namespace {

WrapperConfig wrapper_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "none") return WrapperConfig::none();
  if (kind == "aggregate") return WrapperConfig::aggregate(j.at("k").get<int>());
  if (kind == "switch") return WrapperConfig::switching(j.at("T").get<double>());
  throw std::invalid_argument("unknown wrapper kind: " + kind);
}

nlohmann::json wrapper_to_json(const WrapperConfig& w) {
  switch (w.kind) {
    case WrapperKind::kNone:
      return {{"kind", "none"}};
    case WrapperKind::kAggregate:
      return {{"kind", "aggregate"}, {"k", w.k}};
    case WrapperKind::kSwitch:
      return {{"kind", "switch"}, {"T", w.cost}};
  }
  return {};
}

// Runs work(i) for i in [0, n) on `jobs` threads and invokes commit(i) in
// index order as results complete, so streamed output is deterministic.
void parallel_ordered(int n, int jobs, const std::function<void(int)>& work,
                      const std::function<void(int)>& commit) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) {
      work(i);
      commit(i);
    }
    return;
  }
  std::mutex mu;
  std::condition_variable cv;
  std::vector<char> done(static_cast<std::size_t>(n), 0);
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  const int n_workers = std::min(jobs, n);
  workers.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        work(i);
        {
          std::lock_guard<std::mutex> lock(mu);
          done[static_cast<std::size_t>(i)] = 1;
        }
        cv.notify_one();
      }
    });
  }
  {
    std::unique_lock<std::mutex> lock(mu);
    for (int i = 0; i < n; ++i) {
      cv.wait(lock, [&] { return done[static_cast<std::size_t>(i)] != 0; });
      lock.unlock();
      commit(i);
      lock.lock();
    }
  }
  for (auto& t : workers) t.join();
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

void SweepConfig::validate() const {
  if (environment != "ck" && environment != "slate")
    throw std::invalid_argument("SweepConfig: environment must be 'ck' or 'slate'");
  if (wrappers.empty() || gammas.empty() || sigma_grid.empty())
    throw std::invalid_argument("SweepConfig: wrappers, gammas and sigma grid must be nonempty");
  if (n_runs < 1) throw std::invalid_argument("SweepConfig: n_runs must be >= 1");
  if (eval_rollouts < 1 || eval_horizon < 1)
    throw std::invalid_argument("SweepConfig: evaluation settings must be positive");
  if (n_buckets < 2) throw std::invalid_argument("SweepConfig: need >= 2 buckets");
  for (const auto& w : wrappers) w.validate();
  for (double g : gammas)
    if (!(g >= 0.0) || g >= 1.0)
      throw std::invalid_argument("SweepConfig: gamma values must lie in [0, 1)");
  for (double s : sigma_grid)
    if (s < 0.0) throw std::invalid_argument("SweepConfig: sigma_n must be >= 0");
  ck.validate();
  slate.validate();
  QLearnConfig probe = qlearn;
  probe.gamma = gammas.front();
  probe.validate();
}

nlohmann::json SweepConfig::to_json() const {
  nlohmann::json ws = nlohmann::json::array();
  for (const auto& w : wrappers) ws.push_back(wrapper_to_json(w));
  return {
      {"environment", environment},
      {"wrappers", std::move(ws)},
      {"gammas", gammas},
      {"sigma_n", sigma_grid},
      {"n_runs", n_runs},
      {"qlearn",
       {{"n_events", qlearn.n_events},
        {"alpha0", qlearn.alpha0},
        {"alpha_decay", qlearn.alpha_decay},
        {"init_q", qlearn.init_q}}},
      {"eval", {{"n_rollouts", eval_rollouts}, {"horizon", eval_horizon}}},
      {"observation", {{"n_buckets", n_buckets}}},
      {"ck",
       {{"beta", ck.beta},
        {"tau", ck.tau},
        {"mu_choc", ck.mu_choc},
        {"mu_kale", ck.mu_kale},
        {"sigma_choc", ck.sigma_choc},
        {"sigma_kale", ck.sigma_kale}}},
      {"slate",
       {{"n_items", slate.n_items},
        {"lambda", slate.lambda},
        {"item_std", slate.item_std},
        {"targets", slate.targets},
        {"initial_kaleness", slate.initial_kaleness}}},
      {"master_seed", master_seed}};
}

SweepConfig SweepConfig::from_json(const nlohmann::json& j) {
  SweepConfig c;
  c.environment = j.value("environment", c.environment);
  if (j.contains("wrappers")) {
    c.wrappers.clear();
    for (const auto& w : j.at("wrappers")) c.wrappers.push_back(wrapper_from_json(w));
  }
  if (j.contains("gammas")) c.gammas = j.at("gammas").get<std::vector<double>>();
  if (j.contains("sigma_n")) c.sigma_grid = j.at("sigma_n").get<std::vector<double>>();
  c.n_runs = j.value("n_runs", c.n_runs);
  if (j.contains("qlearn")) {
    const auto& q = j.at("qlearn");
    c.qlearn.n_events = q.value("n_events", c.qlearn.n_events);
    c.qlearn.alpha0 = q.value("alpha0", c.qlearn.alpha0);
    c.qlearn.alpha_decay = q.value("alpha_decay", c.qlearn.alpha_decay);
    c.qlearn.init_q = q.value("init_q", c.qlearn.init_q);
  }
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    c.eval_rollouts = e.value("n_rollouts", c.eval_rollouts);
    c.eval_horizon = e.value("horizon", c.eval_horizon);
  }
  if (j.contains("observation"))
    c.n_buckets = j.at("observation").value("n_buckets", c.n_buckets);
  if (j.contains("ck")) {
    const auto& k = j.at("ck");
    c.ck.beta = k.value("beta", c.ck.beta);
    c.ck.tau = k.value("tau", c.ck.tau);
    c.ck.mu_choc = k.value("mu_choc", c.ck.mu_choc);
    c.ck.mu_kale = k.value("mu_kale", c.ck.mu_kale);
    c.ck.sigma_choc = k.value("sigma_choc", c.ck.sigma_choc);
    c.ck.sigma_kale = k.value("sigma_kale", c.ck.sigma_kale);
  }
  if (j.contains("slate")) {
    const auto& s = j.at("slate");
    c.slate.n_items = s.value("n_items", c.slate.n_items);
    c.slate.lambda = s.value("lambda", c.slate.lambda);
    c.slate.item_std = s.value("item_std", c.slate.item_std);
    if (s.contains("targets")) c.slate.targets = s.at("targets").get<std::vector<double>>();
    c.slate.initial_kaleness = s.value("initial_kaleness", c.slate.initial_kaleness);
  }
  c.master_seed = j.value("master_seed", c.master_seed);
  c.validate();
  return c;
}

std::uint64_t derive_seed(std::uint64_t master, const std::string& tag,
                          const std::string& environment, const std::string& wrapper,
                          double gamma, double sigma_n, int run) {
  const std::string key = tag + "|" + environment + "|" + wrapper + "|g=" +
                          format_double(gamma) + "|s=" + format_double(sigma_n) +
                          "|r=" + std::to_string(run);
  return mix_seed(master, fnv1a64(key));
}

std::unique_ptr<Env> make_env(const SweepConfig& config, double sigma_n) {
  const ObservationModel model{sigma_n, config.n_buckets};
  if (config.environment == "slate") {
    SlateParams params = config.slate;
    params.ck = config.ck;
    return std::make_unique<SlateEnv>(std::move(params), model);
  }
  return std::make_unique<CkEnv>(config.ck, model);
}

TrainedPolicy train_cell(const SweepConfig& config, const WrapperConfig& wrapper,
                         double gamma, double sigma_n, int run) {
  QLearnConfig qc = config.qlearn;
  qc.gamma = gamma;
  qc.seed = derive_seed(config.master_seed, "train", config.environment,
                        wrapper.label(), gamma, sigma_n, run);
  const auto env = make_env(config, sigma_n);
  return train(*env, wrapper, qc);
}

void write_metric_header(std::ostream& os) {
  os << "environment,wrapper,gamma,sigma_n,run,mean_return,std_error\n";
}

void write_metric_row(std::ostream& os, const MetricRow& row) {
  os << row.environment << ',' << row.wrapper << ',' << format_double(row.gamma) << ','
     << format_double(row.sigma_n) << ',' << row.run << ','
     << format_double(row.mean_return) << ',' << format_double(row.std_error) << '\n';
}

std::vector<MetricRow> run_sweep(const SweepConfig& config, int jobs, std::ostream* csv,
                                 std::ostream* progress) {
  config.validate();
  struct Cell {
    WrapperConfig wrapper;
    double gamma;
    double sigma_n;
    int run;
  };
  std::vector<Cell> cells;
  for (const auto& w : config.wrappers)
    for (const double g : config.gammas)
      for (const double s : config.sigma_grid)
        for (int r = 0; r < config.n_runs; ++r) cells.push_back({w, g, s, r});

  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;

  std::vector<MetricRow> rows(cells.size());
  if (csv) write_metric_header(*csv);

  std::atomic<int> completed{0};
  parallel_ordered(
      static_cast<int>(cells.size()), jobs,
      [&](int i) {
        const Cell& c = cells[static_cast<std::size_t>(i)];
        const TrainedPolicy policy =
            train_cell(config, c.wrapper, c.gamma, c.sigma_n, c.run);
        if (!config.save_policies_dir.empty()) {
          const std::string path = config.save_policies_dir + "/" +
                                   config.environment + "_" + c.wrapper.label() +
                                   "_g" + format_double(c.gamma) + "_s" +
                                   format_double(c.sigma_n) + "_r" +
                                   std::to_string(c.run) + ".json";
          std::ofstream out(path);
          out << policy.to_json().dump(2) << '\n';
        }
        const auto env = make_env(config, c.sigma_n);
        const std::uint64_t eval_seed =
            derive_seed(config.master_seed, "eval", config.environment,
                        c.wrapper.label(), c.gamma, c.sigma_n, c.run);
        const EvalResult eval = evaluate(*env, policy, config.eval_rollouts,
                                         config.eval_horizon, c.gamma, eval_seed);
        rows[static_cast<std::size_t>(i)] = {config.environment, c.wrapper.label(),
                                             c.gamma,            c.sigma_n,
                                             c.run,              eval.mean,
                                             eval.std_error};
        ++completed;
      },
      [&](int i) {
        if (csv) {
          write_metric_row(*csv, rows[static_cast<std::size_t>(i)]);
          csv->flush();  // partial results survive interruption
        }
        if (progress && (i + 1) % 20 == 0)
          *progress << "  " << (i + 1) << "/" << cells.size() << " cells\n";
      });
  return rows;
}

std::vector<QValueRow> run_qvalues(const SweepConfig& config, double gamma, int k,
                                   double sigma_n, int n_runs) {
  if (config.environment != "ck")
    throw std::invalid_argument("run_qvalues: only the ck environment has exact panels");
  CKParams params = config.ck;
  params.gamma = gamma;
  const int n = config.n_buckets;
  std::vector<QValueRow> rows;
  const char* action_name[2] = {"choc", "kale"};

  auto emit_exact = [&](const char* panel, const QTable& q) {
    for (int b = 0; b < n; ++b) {
      const double s = satisfaction(ck_grid_point(params, n, b), params.tau);
      for (int a = 0; a < 2; ++a)
        rows.push_back({panel, b, s, action_name[a], "exact", q.at(b, a)});
    }
  };

  const FiniteMDP mdp = build_discrete_mdp(params, n);
  emit_exact("event_exact", solve_q_star(mdp));
  emit_exact("agg_exact", solve_q_star(aggregate_mdp(mdp, k)));

  auto emit_learned = [&](const char* panel, const WrapperConfig& wrapper) {
    std::vector<QTable> tables;
    tables.reserve(static_cast<std::size_t>(n_runs));
    for (int run = 0; run < n_runs; ++run) {
      SweepConfig cell_config = config;
      cell_config.ck = params;
      tables.push_back(train_cell(cell_config, wrapper, gamma, sigma_n, run).q);
    }
    for (int b = 0; b < n; ++b) {
      const double s = (b + 0.5) / n;  // observation-bucket center
      for (int a = 0; a < 2; ++a) {
        double mean = 0.0;
        for (int run = 0; run < n_runs; ++run) {
          const double q = tables[static_cast<std::size_t>(run)].at(b, a);
          rows.push_back({panel, b, s, action_name[a], "run_" + std::to_string(run), q});
          mean += q;
        }
        rows.push_back({panel, b, s, action_name[a], "mean", mean / n_runs});
      }
    }
  };

  emit_learned("event_noisy", WrapperConfig::none());
  emit_learned("agg_noisy", WrapperConfig::aggregate(k));
  return rows;
}

void write_qvalue_csv(std::ostream& os, const std::vector<QValueRow>& rows) {
  os << "panel,bucket,satisfaction,action,source,q_value\n";
  for (const auto& r : rows)
    os << r.panel << ',' << r.bucket << ',' << format_double(r.satisfaction) << ','
       << r.action << ',' << r.source << ',' << format_double(r.q_value) << '\n';
}

nlohmann::json run_bounds(const BoundInputs& in) {
  nlohmann::json out;
  out["inputs"] = {{"gamma", in.gamma},   {"L", in.smooth_l}, {"k", in.k},
                   {"T", in.cost},        {"r_max", in.r_max}, {"epsilon", in.epsilon},
                   {"A", in.advantage}};
  out["statistic_loss_bound"] = statistic_loss_bound(in.epsilon, in.r_max, in.gamma);
  out["q_error_bound"] = q_error_bound(in.epsilon, in.r_max, in.gamma);
  out["aggregation_value_loss_bound"] = aggregation_value_loss_bound(in.k, in.smooth_l, in.gamma);
  out["eps_max"] = eps_max(in.k, in.smooth_l, in.gamma, in.r_max);
  try {
    out["lossless_amplification_lower"] = lossless_amplification_lower(in.advantage, in.k, in.smooth_l, in.gamma);
    out["aggregate_advantage_lower"] = aggregate_advantage_lower(in.advantage, in.k, in.smooth_l, in.gamma);
  } catch (const std::exception& e) {
    out["lossless_amplification_lower_error"] = e.what();
    out["aggregate_advantage_lower_error"] = e.what();
  }
  try {
    out["switching_horizon"] = switching_horizon(in.gamma, in.smooth_l, in.cost);
  } catch (const std::exception& e) {
    out["switching_horizon_error"] = e.what();
  }
  try {
    out["switching_regret_bound"] = switching_regret_bound(in.gamma, in.smooth_l, in.cost);
    out["switching_amplification_threshold"] = switching_amplification_threshold(in.gamma, in.smooth_l, in.cost);
  } catch (const std::exception& e) {
    out["switching_regret_bound_error"] = e.what();
    out["switching_amplification_threshold_error"] = e.what();
  }
  return out;
}

}  // namespace amplify
