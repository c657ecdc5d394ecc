// Experiment orchestration: declarative sweep configs, deterministic seed
// derivation, the noise-sweep and Q-value-panel runners, and the bound
// calculator front-end. Output matches the documented CSV/JSON schemas
// byte-for-byte across reruns of the same config and seed.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "amplify/analysis.hpp"
#include "amplify/qlearn.hpp"
#include "amplify/slate.hpp"
#include "json.hpp"

namespace amplify {

struct SweepConfig {
  std::string environment = "ck";  // "ck" | "slate"
  std::vector<WrapperConfig> wrappers = {
      WrapperConfig::none(),       WrapperConfig::aggregate(3),
      WrapperConfig::aggregate(5), WrapperConfig::switching(1.0),
      WrapperConfig::switching(2.0), WrapperConfig::switching(3.0)};
  std::vector<double> gammas = {0.95, 0.99};
  std::vector<double> sigma_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  int n_runs = 10;
  QLearnConfig qlearn;  // gamma and seed are overridden per cell
  int eval_rollouts = 100;
  int eval_horizon = 1000;
  int n_buckets = 50;
  CKParams ck;
  SlateParams slate;
  std::uint64_t master_seed = 20240901;
  std::string save_policies_dir;  // empty: do not save

  void validate() const;
  nlohmann::json to_json() const;
  static SweepConfig from_json(const nlohmann::json& j);
};

struct MetricRow {
  std::string environment;
  std::string wrapper;
  double gamma = 0.0;
  double sigma_n = 0.0;
  int run = 0;
  double mean_return = 0.0;
  double std_error = 0.0;
};

// Shortest round-trip decimal representation; keeps CSV output stable.
std::string format_double(double v);

// Stable per-run seed: a content hash of (master seed, purpose tag, cell
// identifiers, run index). Adding grid points never changes existing seeds.
std::uint64_t derive_seed(std::uint64_t master, const std::string& tag,
                          const std::string& environment, const std::string& wrapper,
                          double gamma, double sigma_n, int run);

std::unique_ptr<Env> make_env(const SweepConfig& config, double sigma_n);

// Train one policy for a sweep cell (gamma and seed resolved internally).
TrainedPolicy train_cell(const SweepConfig& config, const WrapperConfig& wrapper,
                         double gamma, double sigma_n, int run);

// Full cross-product sweep: wrappers x gammas x sigma grid x runs. Rows are
// emitted to `csv` in canonical order as soon as they are ready (partial
// output survives interruption) and also returned. jobs <= 0 picks the
// hardware concurrency.
std::vector<MetricRow> run_sweep(const SweepConfig& config, int jobs, std::ostream* csv,
                                 std::ostream* progress);

void write_metric_header(std::ostream& os);
void write_metric_row(std::ostream& os, const MetricRow& row);

// One Q-value-per-satisfaction row of the four-panel table: exact event
// tables, exact k-aggregated tables, and the per-run noisy Q-learning
// estimates with their across-run mean.
struct QValueRow {
  std::string panel;   // "event_exact" | "event_noisy" | "agg_exact" | "agg_noisy"
  int bucket = 0;
  double satisfaction = 0.0;
  std::string action;
  std::string source;  // "exact" | "run_<i>" | "mean"
  double q_value = 0.0;
};

std::vector<QValueRow> run_qvalues(const SweepConfig& config, double gamma, int k,
                                   double sigma_n, int n_runs);
void write_qvalue_csv(std::ostream& os, const std::vector<QValueRow>& rows);

// Every analysis quantity for one set of inputs; domain errors are reported
// verbatim in *_error fields instead of aborting.
nlohmann::json run_bounds(const BoundInputs& in);

}  // namespace amplify
