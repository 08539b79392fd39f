#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "eagle/runner.hpp"

namespace {

using eagle::ExperimentConfig;

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string strategies;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int budget = 0;
  int repeats = 0;
  bool theory_mode = false;
};

void add_common(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--config", flags->config_path, "JSON experiment configuration");
  cmd->add_option("--out", flags->out_dir, "output directory");
  cmd->add_option("--strategies", flags->strategies, "comma-separated strategy list");
  cmd->add_option("--seed", flags->seed, "base RNG seed")->each([flags](const std::string&) {
    flags->seed_set = true;
  });
  cmd->add_option("--budget", flags->budget, "query budget N");
  cmd->add_option("--repeats", flags->repeats, "repeated runs per instance/strategy");
  cmd->add_flag("--theory-mode", flags->theory_mode, "normalize candidates and use a unit prior");
}

ExperimentConfig load_config(const CommonFlags& flags) {
  ExperimentConfig cfg = flags.config_path.empty()
                             ? ExperimentConfig{}
                             : ExperimentConfig::from_json_text(read_file(flags.config_path));
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (!flags.strategies.empty()) {
    cfg.strategies.clear();
    std::istringstream ss(flags.strategies);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (!name.empty()) cfg.strategies.push_back(name);
    }
  }
  if (flags.seed_set) cfg.base_seed = flags.seed;
  if (flags.budget > 0) cfg.pool.budget = flags.budget;
  if (flags.repeats > 0) cfg.repeats = flags.repeats;
  if (flags.theory_mode) cfg.theory_mode = true;
  cfg.validate();
  return cfg;
}

int cmd_explain(const CommonFlags& flags, const std::string& instance_csv, int instance_index) {
  ExperimentConfig cfg = load_config(flags);
  Eigen::VectorXd x0;
  if (!instance_csv.empty()) {
    std::vector<double> vals;
    std::istringstream ss(instance_csv);
    std::string field;
    while (std::getline(ss, field, ',')) vals.push_back(std::stod(field));
    x0 = Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  } else {
    const auto instances = cfg.resolved_instances();
    if (instance_index < 0 || instance_index >= static_cast<int>(instances.size())) {
      throw std::runtime_error("instance index out of range");
    }
    x0 = instances[instance_index];
  }
  if (x0.size() != cfg.dim) throw std::runtime_error("instance dimension does not match config");

  std::filesystem::create_directories(cfg.out_dir);
  const auto strategy = eagle::AcquisitionStrategy::from_name(cfg.strategies.front());
  const std::uint64_t seed = eagle::unit_seed(cfg.base_seed, instance_index, strategy.name(), 0);
  auto blackbox = eagle::make_blackbox(cfg, seed);

  eagle::Explanation ex;
  try {
    ex = eagle::explain_instance(cfg, x0, *blackbox, strategy, seed);
  } catch (const eagle::ExplainFailure& e) {
    std::ofstream f(std::filesystem::path(cfg.out_dir) / "trace.json");
    f << eagle::trace_to_json(e.partial_trace()) << '\n';
    std::fprintf(stderr, "%s (partial trace persisted)\n", e.what());
    return 1;
  }

  {
    std::ofstream f(std::filesystem::path(cfg.out_dir) / "trace.json");
    f << eagle::trace_to_json(ex.trace) << '\n';
  }
  {
    nlohmann::json out;
    out["strategy"] = strategy.name();
    out["instance"] = std::vector<double>(x0.data(), x0.data() + x0.size());
    out["importances"] =
        std::vector<double>(ex.importances.data(), ex.importances.data() + ex.importances.size());
    nlohmann::json cis = nlohmann::json::array();
    for (const auto& [lo, hi] : ex.credible_intervals) cis.push_back({lo, hi});
    out["credible_intervals_90"] = std::move(cis);
    out["label_queries"] = ex.trace.label_queries;
    out["duration_ms"] = ex.trace.duration_ms;
    std::ofstream f(std::filesystem::path(cfg.out_dir) / "explanation.json");
    f << out.dump(2) << '\n';
  }

  std::printf("explained instance with %s in %.1f ms (%ld label queries)\n", strategy.name(),
              ex.trace.duration_ms, ex.trace.label_queries);
  for (int i = 0; i < ex.importances.size(); ++i) {
    std::printf("  feature %2d: %+.6f  [%+.6f, %+.6f]\n", i, ex.importances(i),
                ex.credible_intervals[i].first, ex.credible_intervals[i].second);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active perturbation selection for local surrogate explanations"};
  app.require_subcommand(1);

  CommonFlags explain_flags, bench_flags, theory_flags;
  std::string instance_csv;
  int instance_index = 0;

  CLI::App* explain = app.add_subcommand("explain", "explain one instance and persist its trace");
  add_common(explain, &explain_flags);
  explain->add_option("--instance", instance_csv, "instance as comma-separated floats");
  explain->add_option("--instance-index", instance_index, "index into the configured instances");

  CLI::App* bench = app.add_subcommand("benchmark", "run the strategy comparison sweep");
  add_common(bench, &bench_flags);

  CLI::App* theory = app.add_subcommand("validate-theory", "run the bound validators");
  add_common(theory, &theory_flags);

  std::string dir_a, dir_b;
  double tol = 0.0;
  CLI::App* compare = app.add_subcommand("compare", "diff two result directories");
  compare->add_option("dir_a", dir_a, "first result directory")->required();
  compare->add_option("dir_b", dir_b, "second result directory")->required();
  compare->add_option("--tol", tol, "numeric tolerance (0 = byte-identical)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (explain->parsed()) return cmd_explain(explain_flags, instance_csv, instance_index);
    if (bench->parsed()) {
      const int failures = eagle::run_benchmark(load_config(bench_flags));
      if (failures > 0) std::fprintf(stderr, "benchmark finished with %d failed checks\n", failures);
      return failures == 0 ? 0 : 1;
    }
    if (theory->parsed()) {
      CommonFlags f = theory_flags;
      f.theory_mode = true;
      ExperimentConfig cfg = load_config(f);
      if (cfg.blackbox.kind != "synthetic_linear") {
        cfg.blackbox.kind = "synthetic_linear";
        cfg.validate();
      }
      const int violations = eagle::run_validate_theory(cfg);
      if (violations > 0) std::fprintf(stderr, "%d bound checks violated\n", violations);
      return violations == 0 ? 0 : 1;
    }
    if (compare->parsed()) return eagle::compare_result_dirs(dir_a, dir_b, tol) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
