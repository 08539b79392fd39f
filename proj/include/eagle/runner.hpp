#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eagle/acquisition.hpp"
#include "eagle/blackbox.hpp"
#include "eagle/external_model.hpp"
#include "eagle/sampling.hpp"
#include "eagle/surrogate.hpp"
#include "eagle/trace.hpp"

namespace eagle {

struct BlackBoxConfig {
  std::string kind = "moons";  // synthetic_linear | moons | external
  // synthetic_linear
  Eigen::VectorXd phi_star;  // empty means the deterministic default pattern
  double sigma = 0.0;
  // moons
  double sharpness = 4.0;
  // external
  ExternalModelSpec external;
};

// Parameters of the bound-validation runs.
struct TheoryConfig {
  std::vector<int> dims{3, 5, 10};
  std::vector<int> budgets{100, 300};
  int seeds = 50;
  double sigma = 0.1;
  int pool_size = 200;

  std::vector<int> estimation_dims{3, 8};
  std::vector<double> estimation_sigmas{0.1, 0.5};
  std::vector<double> estimation_deltas{0.05, 0.1};
  int estimation_trials = 1000;
  int estimation_budget = 60;
  int estimation_pool = 100;

  double nu_acc = 0.4;
};

struct ExperimentConfig {
  int dim = 10;
  BlackBoxConfig blackbox;
  std::vector<std::string> strategies{"eagle"};
  PoolConfig pool;
  double n0 = 1.0;
  double sigma0_sq = 1.0;
  std::optional<double> lambda;        // empty: d (or 1 in theory mode)
  std::optional<double> kernel_width;  // empty: 0.75·√d
  int repeats = 1;
  std::uint64_t base_seed = 42;
  bool theory_mode = false;
  bool intra_batch_updates = false;
  std::string pool_sampler = "gaussian";  // gaussian | glime
  std::vector<Eigen::VectorXd> instances;
  int generate_instances = 1;  // used when `instances` is empty
  double instance_scale = 1.0;
  std::string reference_strategy = "predictive_variance";  // crossover baseline
  std::string out_dir = "results";
  TheoryConfig theory;

  static ExperimentConfig from_json_text(const std::string& text);
  std::string to_json_text() const;

  PriorSpec resolved_prior() const;
  double resolved_width() const;
  std::vector<Eigen::VectorXd> resolved_instances() const;
  void validate() const;
};

// Seed of the (instance, strategy, repeat) unit's random stream.
std::uint64_t unit_seed(std::uint64_t base_seed, int instance_index, const std::string& strategy,
                        int repeat);

// Deterministic ground-truth importance pattern used when a synthetic model
// is configured without an explicit one: alternating signs, decaying
// magnitudes, unit norm.
Eigen::VectorXd default_phi_star(int dim);

std::unique_ptr<BlackBox> make_blackbox(const ExperimentConfig& cfg, std::uint64_t seed);

struct Explanation {
  Eigen::VectorXd importances;
  std::vector<std::pair<double, double>> credible_intervals;  // 90%
  RunTrace trace;
};

// A black-box fault mid-run; carries the partial trace with its failure
// marker so callers can persist it.
class ExplainFailure : public std::runtime_error {
 public:
  ExplainFailure(const std::string& message, RunTrace partial)
      : std::runtime_error(message), trace_(std::move(partial)) {}
  const RunTrace& partial_trace() const { return trace_; }

 private:
  RunTrace trace_;
};

// One full acquisition run: seed queries, then batched select/query/refit
// until the budget is spent. Deterministic given stream_seed.
Explanation explain_instance(const ExperimentConfig& cfg, const Eigen::VectorXd& x0,
                             BlackBox& blackbox, const AcquisitionStrategy& strategy,
                             std::uint64_t stream_seed);

// Full experiment sweep: instances × strategies × repeats. Writes steps.csv,
// stability.csv, crossover.csv, runtime.csv and run_manifest.json under
// cfg.out_dir. Returns the number of failed invariant checks.
int run_benchmark(const ExperimentConfig& cfg);

// Bound validation over synthetic-linear traces. Writes theory_report.json
// under cfg.out_dir. Returns the number of violated checks.
int run_validate_theory(const ExperimentConfig& cfg);

// Compares the CSV outputs of two result directories; numeric fields must
// agree within tol (tol = 0 demands identical bytes). Returns 0 on match.
int compare_result_dirs(const std::string& dir_a, const std::string& dir_b, double tol);

}  // namespace eagle
