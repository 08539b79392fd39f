#include <doctest.h>

#include <initializer_list>
#include <stdexcept>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "eagle/metrics.hpp"
#include "eagle/runner.hpp"

using namespace eagle;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ExperimentConfig small_moons_config() {
  ExperimentConfig cfg;
  cfg.dim = 2;
  cfg.blackbox.kind = "moons";
  cfg.blackbox.sharpness = 4.0;
  cfg.strategies = {"eagle", "uniform_random", "predictive_variance"};
  cfg.pool.pool_size = 60;
  cfg.pool.seed_count = 10;
  cfg.pool.batch_size = 10;
  cfg.pool.budget = 40;
  cfg.repeats = 2;
  cfg.instances = {Eigen::Vector2d(0.5, 0.25)};
  return cfg;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config json round trip keeps the resolved defaults") {
  ExperimentConfig cfg;
  cfg.dim = 4;
  cfg.blackbox.kind = "synthetic_linear";
  const std::string text = cfg.to_json_text();
  const ExperimentConfig parsed = ExperimentConfig::from_json_text(text);
  CHECK(parsed.dim == 4);
  CHECK(parsed.resolved_prior().lambda == 4.0);              // lambda defaults to d
  CHECK(parsed.resolved_width() == doctest::Approx(0.75 * 2.0));  // 0.75·√d
  CHECK(parsed.pool.pool_size == 1000);
  CHECK(parsed.pool.seed_count == 10);
  CHECK(parsed.pool.batch_size == 10);
  CHECK(parsed.pool.budget == 500);
  CHECK(parsed.n0 == 1.0);
  CHECK(parsed.sigma0_sq == 1.0);
}

TEST_CASE("theory mode flips the default prior to a unit one") {
  ExperimentConfig cfg;
  cfg.dim = 6;
  cfg.theory_mode = true;
  cfg.blackbox.kind = "synthetic_linear";
  CHECK(cfg.resolved_prior().lambda == 1.0);
  cfg.lambda = 3.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.lambda.reset();
  cfg.blackbox.kind = "moons";
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("a degenerate budget reduces explain to the seed fit") {
  ExperimentConfig cfg = small_moons_config();
  cfg.strategies = {"eagle"};
  cfg.pool.budget = cfg.pool.seed_count;  // no active rounds
  auto blackbox = make_blackbox(cfg, 7);
  const Explanation ex = explain_instance(cfg, cfg.instances[0], *blackbox,
                                          AcquisitionStrategy::from_name("eagle"), 7);
  CHECK(ex.trace.steps.size() == 10);
  CHECK(ex.trace.label_queries == 10);

  // Refitting the logged seed queries reproduces the output exactly.
  std::vector<LabeledPerturbation> data;
  for (const auto& s : ex.trace.steps) data.emplace_back(s.z, s.weight, s.y);
  const SurrogatePosterior refit = fit_blr(data, cfg.resolved_prior(), cfg.dim);
  CHECK((refit.phi_hat() - ex.importances).norm() == 0.0);
}

TEST_CASE("explanations are deterministic given the seed") {
  const ExperimentConfig cfg = small_moons_config();
  const auto run = [&]() {
    auto blackbox = make_blackbox(cfg, 99);
    return trace_to_json(explain_instance(cfg, cfg.instances[0], *blackbox,
                                          AcquisitionStrategy::from_name("eagle"), 99)
                             .trace);
  };
  CHECK(run() == run());
}

TEST_CASE("noise-free linear runs rank features like the ground truth") {
  ExperimentConfig cfg;
  cfg.dim = 3;
  cfg.blackbox.kind = "synthetic_linear";
  cfg.blackbox.sigma = 0.0;
  cfg.pool.budget = 200;
  cfg.pool.pool_size = 100;
  cfg.instances = {Eigen::Vector3d::Zero()};
  auto blackbox = make_blackbox(cfg, 5);
  const Explanation ex = explain_instance(cfg, cfg.instances[0], *blackbox,
                                          AcquisitionStrategy::from_name("eagle"), 5);

  const Eigen::VectorXd phi_star = default_phi_star(3);
  // |phi_star| decreases with the feature index, so the fitted magnitudes must too.
  CHECK(std::fabs(ex.importances(0)) > std::fabs(ex.importances(1)));
  CHECK(std::fabs(ex.importances(1)) > std::fabs(ex.importances(2)));
  CHECK((ex.importances - phi_star).norm() < 0.2);
  CHECK(ex.trace.label_queries == 200);
  CHECK(ex.trace.model_evaluations == 200);
}

TEST_CASE("every strategy spends exactly the label budget") {
  ExperimentConfig cfg = small_moons_config();
  for (const char* name :
       {"eagle", "predictive_variance", "uniform_random", "kernel_proportional"}) {
    auto blackbox = make_blackbox(cfg, 11);
    const Explanation ex = explain_instance(cfg, cfg.instances[0], *blackbox,
                                            AcquisitionStrategy::from_name(name), 11);
    CHECK(ex.trace.label_queries == cfg.pool.budget);
    CHECK(ex.trace.model_evaluations == cfg.pool.budget);
    CHECK(blackbox->query_count() == cfg.pool.budget);
  }
}

TEST_CASE("boundary strategy accounts scoring probes separately") {
  ExperimentConfig cfg = small_moons_config();
  auto blackbox = make_blackbox(cfg, 13);
  const Explanation ex =
      explain_instance(cfg, cfg.instances[0], *blackbox,
                       AcquisitionStrategy::from_name("boundary_uncertainty"), 13);
  CHECK(ex.trace.label_queries == cfg.pool.budget);
  // Seeds plus one full pool probe per batch; chosen candidates reuse cached
  // responses instead of querying twice.
  const int batches = (cfg.pool.budget - cfg.pool.seed_count) / cfg.pool.batch_size;
  CHECK(ex.trace.model_evaluations == cfg.pool.seed_count + batches * cfg.pool.pool_size);
}

TEST_CASE("traces telescope and log-det never increases") {
  ExperimentConfig cfg = small_moons_config();
  cfg.lambda = 2.0;  // non-unit prior keeps the identity honest
  auto blackbox = make_blackbox(cfg, 17);
  const Explanation ex = explain_instance(cfg, cfg.instances[0], *blackbox,
                                          AcquisitionStrategy::from_name("eagle"), 17);
  ex.trace.validate();
  const double telescoped = 0.5 * (ex.trace.logdet_v0 - ex.trace.steps.back().logdet_v);
  CHECK(ex.trace.steps.back().cumulative_eig == doctest::Approx(telescoped).epsilon(1e-7));
}

TEST_CASE("trace json round trip") {
  ExperimentConfig cfg = small_moons_config();
  auto blackbox = make_blackbox(cfg, 19);
  const Explanation ex = explain_instance(cfg, cfg.instances[0], *blackbox,
                                          AcquisitionStrategy::from_name("eagle"), 19);
  const std::string text = trace_to_json(ex.trace);
  const RunTrace parsed = trace_from_json(text);
  CHECK(trace_to_json(parsed) == text);
  CHECK(parsed.steps.size() == ex.trace.steps.size());
  REQUIRE(parsed.final_posterior.has_value());
  CHECK((parsed.final_posterior->phi_hat() - ex.importances).norm() < 1e-12);
}

TEST_CASE("benchmark writes deterministic result files") {
  ExperimentConfig cfg = small_moons_config();
  const fs::path dir_a = fresh_dir("eagle_bench_a");
  const fs::path dir_b = fresh_dir("eagle_bench_b");

  cfg.out_dir = dir_a.string();
  CHECK(run_benchmark(cfg) == 0);
  cfg.out_dir = dir_b.string();
  CHECK(run_benchmark(cfg) == 0);

  for (const char* name : {"steps.csv", "stability.csv", "crossover.csv"}) {
    CHECK(read_file(dir_a / name) == read_file(dir_b / name));
  }
  CHECK(compare_result_dirs(dir_a.string(), dir_b.string(), 0.0) == 0);
  CHECK(fs::exists(dir_a / "run_manifest.json"));
  CHECK(fs::exists(dir_a / "runtime.csv"));
}

TEST_CASE("steps.csv rows parse back losslessly") {
  ExperimentConfig cfg = small_moons_config();
  cfg.strategies = {"eagle"};
  cfg.repeats = 1;
  const fs::path dir = fresh_dir("eagle_bench_roundtrip");
  cfg.out_dir = dir.string();
  REQUIRE(run_benchmark(cfg) == 0);

  std::ifstream f(dir / "steps.csv");
  std::string line;
  std::getline(f, line);
  CHECK(line == "instance,strategy,seed,t,metric,value");
  int rows = 0;
  while (std::getline(f, line)) {
    std::istringstream row(line);
    std::string instance, strategy, seed, t, metric, value;
    REQUIRE(std::getline(row, instance, ','));
    REQUIRE(std::getline(row, strategy, ','));
    REQUIRE(std::getline(row, seed, ','));
    REQUIRE(std::getline(row, t, ','));
    REQUIRE(std::getline(row, metric, ','));
    REQUIRE(std::getline(row, value));
    // Round trip: parse the double and re-serialize with the writer's format.
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", std::stod(value));
    CHECK(value == buf);
    ++rows;
  }
  CHECK(rows == 3 * cfg.pool.budget);  // three metrics per step
}

TEST_CASE("single-repeat stability rows carry not-applicable markers") {
  ExperimentConfig cfg = small_moons_config();
  cfg.strategies = {"eagle"};
  cfg.repeats = 1;
  const fs::path dir = fresh_dir("eagle_bench_r1");
  cfg.out_dir = dir.string();
  REQUIRE(run_benchmark(cfg) == 0);
  const std::string stability = read_file(dir / "stability.csv");
  CHECK(stability.find("na,na,na,na,na") != std::string::npos);
}

TEST_CASE("identical strategy names produce identical unit streams") {
  CHECK(unit_seed(1, 0, "eagle", 2) == unit_seed(1, 0, "eagle", 2));
  CHECK(unit_seed(1, 0, "eagle", 2) != unit_seed(1, 0, "eagle", 3));
  CHECK(unit_seed(1, 0, "eagle", 2) != unit_seed(1, 0, "uniform_random", 2));
  CHECK(unit_seed(1, 0, "eagle", 2) != unit_seed(2, 0, "eagle", 2));
}

TEST_CASE("a black-box fault yields a partial trace with a failure marker") {
  ExperimentConfig cfg = small_moons_config();
  cfg.blackbox.kind = "external";
  cfg.blackbox.external.argv = {MODEL_SERVER_PATH, "const", "0.5", "die", "25"};
  cfg.blackbox.external.timeout_ms = 5000;
  auto blackbox = make_blackbox(cfg, 23);

  try {
    explain_instance(cfg, cfg.instances[0], *blackbox, AcquisitionStrategy::from_name("eagle"),
                     23);
    FAIL("expected ExplainFailure");
  } catch (const ExplainFailure& e) {
    const RunTrace& partial = e.partial_trace();
    CHECK(partial.failed);
    CHECK(!partial.failure.empty());
    CHECK(partial.steps.size() < static_cast<std::size_t>(cfg.pool.budget));
    CHECK(partial.steps.size() >= 20);  // the server served two full batches
  }
}

TEST_CASE("theory validation writes a consistent report") {
  ExperimentConfig cfg;
  cfg.dim = 3;
  cfg.theory_mode = true;
  cfg.blackbox.kind = "synthetic_linear";
  cfg.pool.pool_size = 80;
  cfg.pool.budget = 60;
  cfg.theory.dims = {3};
  cfg.theory.budgets = {60};
  cfg.theory.seeds = 5;
  cfg.theory.estimation_dims = {3};
  cfg.theory.estimation_sigmas = {0.3};
  cfg.theory.estimation_deltas = {0.1};
  cfg.theory.estimation_trials = 40;
  cfg.theory.estimation_budget = 40;
  cfg.theory.estimation_pool = 50;
  const fs::path dir = fresh_dir("eagle_theory_report");
  cfg.out_dir = dir.string();

  CHECK(run_validate_theory(cfg) == 0);
  const std::string report = read_file(dir / "theory_report.json");
  CHECK(report.find("\"satisfied\": 5") != std::string::npos);
  CHECK(report.find("\"trials\": 40") != std::string::npos);
  CHECK(report.find("\"total_violations\": 0") != std::string::npos);
}

TEST_CASE("compare flags differing directories") {
  ExperimentConfig cfg = small_moons_config();
  cfg.strategies = {"eagle"};
  cfg.repeats = 1;
  const fs::path dir_a = fresh_dir("eagle_cmp_a");
  const fs::path dir_b = fresh_dir("eagle_cmp_b");
  cfg.out_dir = dir_a.string();
  REQUIRE(run_benchmark(cfg) == 0);
  cfg.base_seed += 1;
  cfg.out_dir = dir_b.string();
  REQUIRE(run_benchmark(cfg) == 0);
  CHECK(compare_result_dirs(dir_a.string(), dir_b.string(), 0.0) > 0);
  CHECK(compare_result_dirs(dir_a.string(), dir_a.string(), 0.0) == 0);
}

TEST_CASE("glime pool sampling is available through the config") {
  ExperimentConfig cfg = small_moons_config();
  cfg.pool_sampler = "glime";
  cfg.strategies = {"kernel_proportional"};
  auto blackbox = make_blackbox(cfg, 29);
  const Explanation ex =
      explain_instance(cfg, cfg.instances[0], *blackbox,
                       AcquisitionStrategy::from_name("kernel_proportional"), 29);
  CHECK(ex.trace.label_queries == cfg.pool.budget);

  // Samples concentrate near the instance under the kernel-matched sampler.
  double mean_dist = 0.0;
  for (const auto& s : ex.trace.steps) mean_dist += (s.z - cfg.instances[0]).norm();
  mean_dist /= ex.trace.steps.size();
  CHECK(mean_dist < 2.0 * cfg.resolved_width());
}
