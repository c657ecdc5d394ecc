// Experiment harness CLI.
//
//   harness qvalues --gamma 0.99 --k 5 --sigma-n 0.3 --out qvalues.csv
//   harness sweep  --config sweep.json --out sweep.csv
//   harness verify
//   harness bounds --gamma 0.99 --L 0.1 --k 5 --T 1 --r-max 8 --epsilon 0.01 --A 1
//   harness eval   --policy policy.json --sigma-n 0.3 --out eval.json
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "amplify/experiment.hpp"
#include "amplify/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailure = 1;
constexpr int kExitConfigError = 2;

amplify::SweepConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  return amplify::SweepConfig::from_json(j);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Advantage-amplification experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<double> gamma_flag;
  std::optional<double> sigma_flag;
  std::optional<int> k_flag;
  std::optional<double> cost_flag;
  std::optional<std::uint64_t> seed_flag;
  std::optional<int> runs_flag;
  std::optional<std::string> env_flag;
  int jobs = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--out", out_path, "output file (default: stdout)");
    cmd->add_option("--gamma", gamma_flag, "override: single discount");
    cmd->add_option("--sigma-n", sigma_flag, "override: single observation noise");
    cmd->add_option("--k", k_flag, "override: aggregate-k wrapper only");
    cmd->add_option("--T", cost_flag, "override: switching-cost wrapper only");
    cmd->add_option("--seed", seed_flag, "override: master seed");
    cmd->add_option("--runs", runs_flag, "override: training runs per cell");
    cmd->add_option("--env", env_flag, "override: environment (ck|slate)");
    cmd->add_option("--jobs", jobs, "worker threads (0 = hardware)");
  };

  auto* cmd_qvalues = app.add_subcommand(
      "qvalues", "exact and learned Q-values per satisfaction bucket");
  add_common(cmd_qvalues);

  auto* cmd_sweep = app.add_subcommand("sweep", "noise-grid training/evaluation sweep");
  std::string save_policies_dir;
  add_common(cmd_sweep);
  cmd_sweep->add_option("--save-policies", save_policies_dir,
                        "directory for per-run policy JSON files");

  auto* cmd_verify = app.add_subcommand("verify", "run the numerical check suites");
  std::string scope = "all";
  cmd_verify->add_option("--scope", scope,
                         "check name filter (substring; default all)");
  cmd_verify->add_option("--seed", seed_flag, "seed for randomized checks");

  auto* cmd_bounds = app.add_subcommand("bounds", "closed-form bound calculator");
  amplify::BoundInputs bounds;
  cmd_bounds->add_option("--gamma", bounds.gamma, "discount in (0,1)")->required();
  cmd_bounds->add_option("--L", bounds.smooth_l, "smoothness bound")->required();
  cmd_bounds->add_option("--k", bounds.k, "repetition horizon")->required();
  cmd_bounds->add_option("--T", bounds.cost, "switching cost")->required();
  cmd_bounds->add_option("--r-max", bounds.r_max, "max |reward|")->required();
  cmd_bounds->add_option("--epsilon", bounds.epsilon, "statistic sufficiency")->required();
  cmd_bounds->add_option("--A", bounds.advantage, "event-level advantage")->required();
  cmd_bounds->add_option("--out", out_path, "output file (default: stdout)");

  auto* cmd_eval = app.add_subcommand("eval", "evaluate a saved policy");
  std::string policy_path;
  int eval_rollouts = 100;
  int eval_horizon = 1000;
  cmd_eval->add_option("--policy", policy_path, "policy JSON file")->required();
  add_common(cmd_eval);
  cmd_eval->add_option("--rollouts", eval_rollouts, "Monte Carlo rollouts");
  cmd_eval->add_option("--horizon", eval_horizon, "rollout length in base events");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    amplify::SweepConfig config = load_config(config_path);
    if (env_flag) config.environment = *env_flag;
    if (gamma_flag) config.gammas = {*gamma_flag};
    if (sigma_flag) config.sigma_grid = {*sigma_flag};
    if (k_flag) config.wrappers = {amplify::WrapperConfig::aggregate(*k_flag)};
    if (cost_flag) config.wrappers = {amplify::WrapperConfig::switching(*cost_flag)};
    if (seed_flag) config.master_seed = *seed_flag;
    if (runs_flag) config.n_runs = *runs_flag;

    if (cmd_qvalues->parsed()) {
      config.validate();
      const double gamma = gamma_flag.value_or(0.99);
      const int k = k_flag.value_or(5);
      const double sigma_n = sigma_flag.value_or(0.3);
      const auto rows =
          amplify::run_qvalues(config, gamma, k, sigma_n, config.n_runs);
      if (out_path.empty()) {
        amplify::write_qvalue_csv(std::cout, rows);
      } else {
        auto out = open_output(out_path);
        amplify::write_qvalue_csv(out, rows);
      }
      return kExitOk;
    }

    if (cmd_sweep->parsed()) {
      config.save_policies_dir = save_policies_dir;
      config.validate();
      if (out_path.empty()) {
        amplify::run_sweep(config, jobs, &std::cout, nullptr);
      } else {
        auto out = open_output(out_path);
        amplify::run_sweep(config, jobs, &out, &std::cerr);
      }
      return kExitOk;
    }

    if (cmd_verify->parsed()) {
      const auto results = amplify::verify_all(seed_flag.value_or(20240901));
      bool all_passed = true;
      bool any_matched = false;
      for (const auto& r : results) {
        if (scope != "all" && r.name.find(scope) == std::string::npos) continue;
        any_matched = true;
        all_passed = all_passed && r.passed;
        std::printf("[%s]%s %s: %s (%.2f s)\n", r.passed ? "PASS" : "FAIL",
                    r.vacuous ? " [vacuous premise on CK]" : "", r.name.c_str(),
                    r.details.c_str(), r.seconds);
      }
      if (!any_matched) {
        std::fprintf(stderr, "no check matches scope '%s'\n", scope.c_str());
        return kExitConfigError;
      }
      return all_passed ? kExitOk : kExitVerifyFailure;
    }

    if (cmd_bounds->parsed()) {
      const auto j = amplify::run_bounds(bounds);
      if (out_path.empty()) {
        std::cout << j.dump(2) << '\n';
      } else {
        auto out = open_output(out_path);
        out << j.dump(2) << '\n';
      }
      return kExitOk;
    }

    if (cmd_eval->parsed()) {
      std::ifstream in(policy_path);
      if (!in) throw std::invalid_argument("cannot open policy file: " + policy_path);
      nlohmann::json pj;
      in >> pj;
      const auto policy = amplify::TrainedPolicy::from_json(pj);
      config.validate();
      const double sigma_n = sigma_flag.value_or(0.0);
      const double gamma = gamma_flag.value_or(policy.config.gamma);
      const auto env = amplify::make_env(config, sigma_n);
      const auto result =
          amplify::evaluate(*env, policy, eval_rollouts, eval_horizon, gamma,
                            seed_flag.value_or(config.master_seed));
      nlohmann::json out_json = {{"mean_return", result.mean},
                                 {"std_error", result.std_error},
                                 {"n_rollouts", eval_rollouts},
                                 {"horizon", eval_horizon},
                                 {"gamma", gamma},
                                 {"sigma_n", sigma_n}};
      if (out_path.empty()) {
        std::cout << out_json.dump(2) << '\n';
      } else {
        auto out = open_output(out_path);
        out << out_json.dump(2) << '\n';
      }
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitVerifyFailure;
  }
  return kExitOk;
}
