#include "eagle/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "eagle/metrics.hpp"
#include "eagle/theory.hpp"

namespace eagle {

namespace {

using json = nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Eigen::VectorXd vec_from_json(const json& j) {
  const auto vals = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

json vec_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

void normalize_to_unit_ball(std::vector<Eigen::VectorXd>& zs) {
  double max_norm = 0.0;
  for (const auto& z : zs) max_norm = std::max(max_norm, z.norm());
  if (max_norm <= 0.0) return;
  for (auto& z : zs) z /= max_norm;
}

double mean_of(const std::vector<double>& xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / xs.size();
}

double std_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / (xs.size() - 1));
}

}  // namespace

std::uint64_t unit_seed(std::uint64_t base_seed, int instance_index, const std::string& strategy,
                        int repeat) {
  std::uint64_t s = mix_seed(base_seed, 0x9d2c5680u + static_cast<std::uint64_t>(instance_index));
  s = mix_seed(s, hash_name(strategy));
  return mix_seed(s, static_cast<std::uint64_t>(repeat));
}

Eigen::VectorXd default_phi_star(int dim) {
  Eigen::VectorXd phi(dim);
  for (int j = 0; j < dim; ++j) {
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    phi(j) = sign * (dim - j);
  }
  return phi / phi.norm();
}

PriorSpec ExperimentConfig::resolved_prior() const {
  PriorSpec p;
  p.n0 = n0;
  p.sigma0_sq = sigma0_sq;
  if (lambda.has_value()) {
    p.lambda = *lambda;
  } else {
    p.lambda = theory_mode ? 1.0 : static_cast<double>(dim);
  }
  return p;
}

double ExperimentConfig::resolved_width() const {
  return kernel_width.value_or(LocalityKernel::default_width(dim));
}

std::vector<Eigen::VectorXd> ExperimentConfig::resolved_instances() const {
  if (!instances.empty()) return instances;
  RngStream rng(mix_seed(base_seed, hash_name("instances")));
  std::vector<Eigen::VectorXd> out;
  out.reserve(generate_instances);
  for (int i = 0; i < generate_instances; ++i) {
    Eigen::VectorXd x(dim);
    for (int j = 0; j < dim; ++j) x(j) = instance_scale * rng.gaussian();
    out.push_back(std::move(x));
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (dim <= 0) throw std::invalid_argument("config: dimension must be positive");
  if (strategies.empty()) throw std::invalid_argument("config: at least one strategy required");
  for (const auto& s : strategies) AcquisitionStrategy::from_name(s);  // throws on bad name
  pool.validate(dim);
  resolved_prior().validate();
  if (repeats <= 0) throw std::invalid_argument("config: repeats must be positive");
  if (pool_sampler != "gaussian" && pool_sampler != "glime") {
    throw std::invalid_argument("config: pool_sampler must be 'gaussian' or 'glime'");
  }
  for (const auto& x : instances) {
    if (x.size() != dim) throw std::invalid_argument("config: instance dimension mismatch");
  }
  if (instances.empty() && generate_instances <= 0) {
    throw std::invalid_argument("config: no instances configured");
  }
  if (theory_mode) {
    if (blackbox.kind != "synthetic_linear") {
      throw std::invalid_argument("config: theory mode requires the synthetic_linear black box");
    }
    if (lambda.has_value() && *lambda != 1.0) {
      throw std::invalid_argument("config: theory mode requires lambda = 1");
    }
  }
  if (blackbox.kind != "synthetic_linear" && blackbox.kind != "moons" &&
      blackbox.kind != "external") {
    throw std::invalid_argument("config: unknown black box kind: " + blackbox.kind);
  }
  if (blackbox.kind == "external") blackbox.external.validate();
  if (blackbox.kind == "synthetic_linear" && blackbox.phi_star.size() != 0 &&
      blackbox.phi_star.size() != dim) {
    throw std::invalid_argument("config: phi_star dimension mismatch");
  }
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig cfg;
  if (j.contains("dimension")) cfg.dim = j["dimension"].get<int>();
  if (j.contains("blackbox")) {
    const auto& b = j["blackbox"];
    cfg.blackbox.kind = b.value("kind", cfg.blackbox.kind);
    if (b.contains("phi_star")) cfg.blackbox.phi_star = vec_from_json(b["phi_star"]);
    cfg.blackbox.sigma = b.value("sigma", cfg.blackbox.sigma);
    cfg.blackbox.sharpness = b.value("sharpness", cfg.blackbox.sharpness);
    if (b.contains("argv")) cfg.blackbox.external.argv = b["argv"].get<std::vector<std::string>>();
    if (b.contains("transport")) {
      const std::string t = b["transport"].get<std::string>();
      if (t == "stdio") {
        cfg.blackbox.external.transport = ExternalModelSpec::Transport::stdio;
      } else if (t == "csv") {
        cfg.blackbox.external.transport = ExternalModelSpec::Transport::csv;
      } else {
        throw std::invalid_argument("config: unknown transport: " + t);
      }
    }
    cfg.blackbox.external.timeout_ms = b.value("timeout_ms", cfg.blackbox.external.timeout_ms);
    cfg.blackbox.external.scratch_dir = b.value("scratch_dir", cfg.blackbox.external.scratch_dir);
  }
  if (j.contains("strategies")) cfg.strategies = j["strategies"].get<std::vector<std::string>>();
  if (j.contains("pool")) {
    const auto& p = j["pool"];
    cfg.pool.pool_size = p.value("pool_size", cfg.pool.pool_size);
    cfg.pool.seed_count = p.value("seed_count", cfg.pool.seed_count);
    cfg.pool.batch_size = p.value("batch_size", cfg.pool.batch_size);
    cfg.pool.budget = p.value("budget", cfg.pool.budget);
    if (p.contains("perturb_scale")) {
      if (p["perturb_scale"].is_number()) {
        cfg.pool.perturb_scale =
            Eigen::VectorXd::Constant(cfg.dim, p["perturb_scale"].get<double>());
      } else {
        cfg.pool.perturb_scale = vec_from_json(p["perturb_scale"]);
      }
    }
  }
  if (j.contains("prior")) {
    const auto& p = j["prior"];
    cfg.n0 = p.value("n0", cfg.n0);
    cfg.sigma0_sq = p.value("sigma0_sq", cfg.sigma0_sq);
    if (p.contains("lambda") && !p["lambda"].is_null()) cfg.lambda = p["lambda"].get<double>();
  }
  if (j.contains("kernel_width") && !j["kernel_width"].is_null()) {
    cfg.kernel_width = j["kernel_width"].get<double>();
  }
  cfg.repeats = j.value("repeats", cfg.repeats);
  cfg.base_seed = j.value("base_seed", cfg.base_seed);
  cfg.theory_mode = j.value("theory_mode", cfg.theory_mode);
  cfg.intra_batch_updates = j.value("intra_batch_updates", cfg.intra_batch_updates);
  cfg.pool_sampler = j.value("pool_sampler", cfg.pool_sampler);
  if (j.contains("instances")) {
    for (const auto& row : j["instances"]) cfg.instances.push_back(vec_from_json(row));
  }
  cfg.generate_instances = j.value("generate_instances", cfg.generate_instances);
  cfg.instance_scale = j.value("instance_scale", cfg.instance_scale);
  cfg.reference_strategy = j.value("reference_strategy", cfg.reference_strategy);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  if (j.contains("theory")) {
    const auto& t = j["theory"];
    TheoryConfig& tc = cfg.theory;
    if (t.contains("dims")) tc.dims = t["dims"].get<std::vector<int>>();
    if (t.contains("budgets")) tc.budgets = t["budgets"].get<std::vector<int>>();
    tc.seeds = t.value("seeds", tc.seeds);
    tc.sigma = t.value("sigma", tc.sigma);
    tc.pool_size = t.value("pool_size", tc.pool_size);
    if (t.contains("estimation_dims")) tc.estimation_dims = t["estimation_dims"].get<std::vector<int>>();
    if (t.contains("estimation_sigmas")) {
      tc.estimation_sigmas = t["estimation_sigmas"].get<std::vector<double>>();
    }
    if (t.contains("estimation_deltas")) {
      tc.estimation_deltas = t["estimation_deltas"].get<std::vector<double>>();
    }
    tc.estimation_trials = t.value("estimation_trials", tc.estimation_trials);
    tc.estimation_budget = t.value("estimation_budget", tc.estimation_budget);
    tc.estimation_pool = t.value("estimation_pool", tc.estimation_pool);
    tc.nu_acc = t.value("nu_acc", tc.nu_acc);
  }
  cfg.validate();
  return cfg;
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["dimension"] = dim;
  json b;
  b["kind"] = blackbox.kind;
  if (blackbox.kind == "synthetic_linear") {
    b["phi_star"] = vec_to_json(blackbox.phi_star.size() ? blackbox.phi_star : default_phi_star(dim));
    b["sigma"] = blackbox.sigma;
  } else if (blackbox.kind == "moons") {
    b["sharpness"] = blackbox.sharpness;
  } else {
    b["argv"] = blackbox.external.argv;
    b["transport"] =
        blackbox.external.transport == ExternalModelSpec::Transport::stdio ? "stdio" : "csv";
    b["timeout_ms"] = blackbox.external.timeout_ms;
    b["scratch_dir"] = blackbox.external.scratch_dir;
  }
  j["blackbox"] = std::move(b);
  j["strategies"] = strategies;
  j["pool"] = {{"pool_size", pool.pool_size},
               {"seed_count", pool.seed_count},
               {"batch_size", pool.batch_size},
               {"budget", pool.budget},
               {"perturb_scale", vec_to_json(pool.resolved_scale(dim))}};
  const PriorSpec prior = resolved_prior();
  j["prior"] = {{"n0", prior.n0}, {"sigma0_sq", prior.sigma0_sq}, {"lambda", prior.lambda}};
  j["kernel_width"] = resolved_width();
  j["repeats"] = repeats;
  j["base_seed"] = base_seed;
  j["theory_mode"] = theory_mode;
  j["intra_batch_updates"] = intra_batch_updates;
  j["pool_sampler"] = pool_sampler;
  json inst = json::array();
  for (const auto& x : resolved_instances()) inst.push_back(vec_to_json(x));
  j["instances"] = std::move(inst);
  j["reference_strategy"] = reference_strategy;
  j["out_dir"] = out_dir;
  j["theory"] = {{"dims", theory.dims},
                 {"budgets", theory.budgets},
                 {"seeds", theory.seeds},
                 {"sigma", theory.sigma},
                 {"pool_size", theory.pool_size},
                 {"estimation_dims", theory.estimation_dims},
                 {"estimation_sigmas", theory.estimation_sigmas},
                 {"estimation_deltas", theory.estimation_deltas},
                 {"estimation_trials", theory.estimation_trials},
                 {"estimation_budget", theory.estimation_budget},
                 {"estimation_pool", theory.estimation_pool},
                 {"nu_acc", theory.nu_acc}};
  return j.dump(2);
}

std::unique_ptr<BlackBox> make_blackbox(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.blackbox.kind == "synthetic_linear") {
    Eigen::VectorXd phi =
        cfg.blackbox.phi_star.size() ? cfg.blackbox.phi_star : default_phi_star(cfg.dim);
    return std::make_unique<SyntheticLinearModel>(std::move(phi), cfg.blackbox.sigma,
                                                  mix_seed(seed, hash_name("noise")));
  }
  if (cfg.blackbox.kind == "moons") {
    return std::make_unique<MoonsModel>(cfg.blackbox.sharpness, cfg.dim);
  }
  return std::make_unique<ExternalProcessModel>(cfg.blackbox.external);
}

Explanation explain_instance(const ExperimentConfig& cfg, const Eigen::VectorXd& x0,
                             BlackBox& blackbox, const AcquisitionStrategy& strategy,
                             std::uint64_t stream_seed) {
  const auto t_start = std::chrono::steady_clock::now();
  const int d = cfg.dim;
  if (x0.size() != d) throw std::invalid_argument("explain_instance: instance dimension mismatch");

  const PriorSpec prior = cfg.resolved_prior();
  const LocalityKernel kernel(x0, cfg.resolved_width());
  RngStream rng(stream_seed);

  RunTrace trace;
  trace.dim = d;
  trace.strategy = strategy.name();
  trace.rng_seed = stream_seed;
  trace.prior = prior;
  trace.theory_mode = cfg.theory_mode;
  trace.logdet_v0 = -d * std::log(prior.lambda);
  trace.trace_v0 = d / prior.lambda;

  const long evals_before = blackbox.query_count();

  SpdMatrix v_run = SpdMatrix::scaled_identity(d, 1.0 / prior.lambda);
  double cum_eig = 0.0;
  int t = 0;
  std::vector<LabeledPerturbation> data;
  data.reserve(cfg.pool.budget);

  const auto absorb = [&](const Eigen::VectorXd& z, double y, double score) {
    const double w = std::clamp(kernel.weight(z), 0.0, 1.0);
    const double gain = 0.5 * std::log1p(w * v_run.quad_form(z));
    v_run = rank1_downdate_covariance(v_run, z, w);
    cum_eig += gain;
    ++t;
    trace.steps.push_back(
        {t, z, w, y, score, v_run.log_det(), v_run.trace(), gain, cum_eig});
    data.emplace_back(z, w, y);
  };

  const auto finish = [&](bool failed, const std::string& why) {
    trace.label_queries = t;
    trace.model_evaluations = blackbox.query_count() - evals_before;
    trace.failed = failed;
    trace.failure = why;
    trace.duration_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t_start)
                            .count();
  };

  SurrogatePosterior post = SurrogatePosterior::prior_only(d, prior);
  const auto refit_and_checkpoint = [&]() {
    post = fit_blr(data, prior, d);
    trace.checkpoints.push_back(
        {t, post.phi_hat(), post.s2(), mean_credible_width(post, 0.90)});
  };

  try {
    // Seed phase.
    std::vector<Eigen::VectorXd> seeds =
        draw_perturbations(kernel, cfg.pool, cfg.pool.seed_count, rng);
    if (cfg.theory_mode) normalize_to_unit_ball(seeds);
    const std::vector<double> seed_ys = blackbox.batch_predict(seeds);
    for (std::size_t i = 0; i < seeds.size(); ++i) absorb(seeds[i], seed_ys[i], 0.0);
    refit_and_checkpoint();

    // Active batches.
    while (t < cfg.pool.budget) {
      const int b = std::min(cfg.pool.batch_size, cfg.pool.budget - t);
      std::vector<Eigen::VectorXd> pool = cfg.pool_sampler == "glime"
                                              ? glime_pool(kernel, cfg.pool, rng)
                                              : draw_pool(kernel, cfg.pool, rng);
      if (cfg.theory_mode) normalize_to_unit_ball(pool);

      AcquisitionStrategy strat = strategy;
      strat.intra_batch_updates = strategy.intra_batch_updates || cfg.intra_batch_updates;
      const std::vector<ScoredCandidate> batch =
          select_batch(post, kernel, strat, pool, b, &blackbox, &rng);

      std::vector<Eigen::VectorXd> to_query;
      for (const auto& c : batch) {
        if (!c.cached_response) to_query.push_back(c.z);
      }
      const std::vector<double> fresh_ys = blackbox.batch_predict(to_query);
      std::size_t fresh_i = 0;
      for (const auto& c : batch) {
        const double y = c.cached_response ? *c.cached_response : fresh_ys[fresh_i++];
        absorb(c.z, y, c.score);
      }
      refit_and_checkpoint();
    }
  } catch (const std::exception& e) {
    finish(true, e.what());
    throw ExplainFailure(std::string("explanation aborted: ") + e.what(), std::move(trace));
  }

  trace.final_posterior = post;
  finish(false, "");

  Explanation result;
  result.importances = post.phi_hat();
  for (int i = 0; i < d; ++i) result.credible_intervals.push_back(credible_interval(post, i, 0.90));
  result.trace = std::move(trace);
  return result;
}

namespace {

// Pairwise top-5 Jaccard values across the runs' importance vectors.
std::vector<double> pairwise_jaccard5(const std::vector<Eigen::VectorXd>& runs) {
  std::vector<double> out;
  const int k = std::min<int>(5, static_cast<int>(runs.front().size()));
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t j = i + 1; j < runs.size(); ++j) {
      out.push_back(jaccard_topk({runs[i], runs[j]}, k));
    }
  }
  return out;
}

struct UnitResult {
  int instance = 0;
  std::string strategy;
  int repeat = 0;
  RunTrace trace;
};

}  // namespace

int run_benchmark(const ExperimentConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);

  const std::vector<Eigen::VectorXd> instances = cfg.resolved_instances();
  int failures = 0;
  std::vector<UnitResult> units;
  units.reserve(instances.size() * cfg.strategies.size() * cfg.repeats);

  for (std::size_t ii = 0; ii < instances.size(); ++ii) {
    for (const auto& strategy_name : cfg.strategies) {
      const AcquisitionStrategy strategy = AcquisitionStrategy::from_name(strategy_name);
      for (int r = 0; r < cfg.repeats; ++r) {
        const std::uint64_t seed = unit_seed(cfg.base_seed, static_cast<int>(ii), strategy_name, r);
        auto blackbox = make_blackbox(cfg, seed);
        try {
          Explanation ex = explain_instance(cfg, instances[ii], *blackbox, strategy, seed);
          // Budget accounting and trace bookkeeping must hold for every unit.
          if (ex.trace.label_queries != cfg.pool.budget) {
            std::fprintf(stderr, "invariant failure: unit used %ld labels, budget %d\n",
                         ex.trace.label_queries, cfg.pool.budget);
            ++failures;
          }
          const double telescoped = 0.5 * (ex.trace.logdet_v0 - ex.trace.steps.back().logdet_v);
          if (std::fabs(ex.trace.steps.back().cumulative_eig - telescoped) > 1e-7) {
            std::fprintf(stderr, "invariant failure: cumulative gain does not telescope\n");
            ++failures;
          }
          ex.trace.validate();
          units.push_back({static_cast<int>(ii), strategy_name, r, std::move(ex.trace)});
        } catch (const ExplainFailure& e) {
          std::fprintf(stderr, "unit (instance %zu, %s, repeat %d) failed: %s\n", ii,
                       strategy_name.c_str(), r, e.what());
          ++failures;
          units.push_back({static_cast<int>(ii), strategy_name, r, e.partial_trace()});
        }
      }
    }
  }

  // steps.csv: per-step metric curves. Deterministic: loop order and fixed
  // float formatting; no wall-clock values in this file.
  {
    std::ofstream f(fs::path(cfg.out_dir) / "steps.csv");
    f << "instance,strategy,seed,t,metric,value\n";
    for (const auto& u : units) {
      const auto d_series = metric_series(u.trace, TraceMetric::d_efficiency);
      const auto a_series = metric_series(u.trace, TraceMetric::a_efficiency);
      const auto g_series = metric_series(u.trace, TraceMetric::cumulative_information_gain);
      for (std::size_t s = 0; s < d_series.size(); ++s) {
        const int t = d_series[s].first;
        f << u.instance << ',' << u.strategy << ',' << u.repeat << ',' << t << ",d_efficiency,"
          << fmt(d_series[s].second) << '\n';
        f << u.instance << ',' << u.strategy << ',' << u.repeat << ',' << t << ",a_efficiency,"
          << fmt(a_series[s].second) << '\n';
        f << u.instance << ',' << u.strategy << ',' << u.repeat << ',' << t << ",cig,"
          << fmt(g_series[s].second) << '\n';
      }
    }
  }

  // Group traces by (instance, strategy) preserving config order.
  const auto units_of = [&](int instance, const std::string& strategy) {
    std::vector<const RunTrace*> out;
    for (const auto& u : units) {
      if (u.instance == instance && u.strategy == strategy && !u.trace.failed) {
        out.push_back(&u.trace);
      }
    }
    return out;
  };

  // stability.csv at batch checkpoints across repeats.
  {
    std::ofstream f(fs::path(cfg.out_dir) / "stability.csv");
    f << "instance,strategy,t,jaccard_top5_mean,jaccard_top5_std,ccm,asfe,ars,ci_width_90\n";
    for (std::size_t ii = 0; ii < instances.size(); ++ii) {
      for (const auto& strategy_name : cfg.strategies) {
        const auto traces = units_of(static_cast<int>(ii), strategy_name);
        if (traces.empty()) continue;
        const std::size_t n_checkpoints = traces.front()->checkpoints.size();
        for (std::size_t c = 0; c < n_checkpoints; ++c) {
          const int t = traces.front()->checkpoints[c].t;
          std::vector<Eigen::VectorXd> phis;
          std::vector<double> widths;
          for (const auto* tr : traces) {
            if (c < tr->checkpoints.size()) {
              phis.push_back(tr->checkpoints[c].phi);
              widths.push_back(tr->checkpoints[c].ci_width_90);
            }
          }
          f << ii << ',' << strategy_name << ',' << t << ',';
          if (phis.size() >= 2) {
            const std::vector<double> jacc = pairwise_jaccard5(phis);
            const ConsistencyResult cons = ccm(phis);
            f << fmt(mean_of(jacc)) << ',' << fmt(std_of(jacc)) << ',' << fmt(cons.ccm) << ','
              << fmt(cons.asfe) << ',' << fmt(cons.ars) << ',';
          } else {
            f << "na,na,na,na,na,";
          }
          f << fmt(mean_of(widths)) << '\n';
        }
      }
    }
  }

  // crossover.csv: budget at which each strategy first matches the reference
  // strategy's full-budget value, per instance.
  {
    std::ofstream f(fs::path(cfg.out_dir) / "crossover.csv");
    f << "instance,strategy,metric,reference_strategy,reference_value,crossover_t\n";
    const bool have_ref = std::find(cfg.strategies.begin(), cfg.strategies.end(),
                                    cfg.reference_strategy) != cfg.strategies.end();
    if (have_ref) {
      for (std::size_t ii = 0; ii < instances.size(); ++ii) {
        const auto ref_traces = units_of(static_cast<int>(ii), cfg.reference_strategy);
        if (ref_traces.empty()) continue;

        // Seed-averaged step series for a strategy.
        const auto mean_series = [&](const std::vector<const RunTrace*>& traces,
                                     TraceMetric metric) {
          std::vector<std::pair<int, double>> acc = metric_series(*traces.front(), metric);
          for (std::size_t k = 1; k < traces.size(); ++k) {
            const auto s = metric_series(*traces[k], metric);
            for (std::size_t i = 0; i < acc.size() && i < s.size(); ++i) acc[i].second += s[i].second;
          }
          for (auto& [t, v] : acc) v /= static_cast<double>(traces.size());
          return acc;
        };
        // CCM across repeats at each checkpoint.
        const auto ccm_series = [&](const std::vector<const RunTrace*>& traces) {
          std::vector<std::pair<int, double>> out;
          if (traces.size() < 2) return out;
          const std::size_t n_checkpoints = traces.front()->checkpoints.size();
          for (std::size_t c = 0; c < n_checkpoints; ++c) {
            std::vector<Eigen::VectorXd> phis;
            for (const auto* tr : traces) {
              if (c < tr->checkpoints.size()) phis.push_back(tr->checkpoints[c].phi);
            }
            if (phis.size() >= 2) {
              out.emplace_back(traces.front()->checkpoints[c].t, ccm(phis).ccm);
            }
          }
          return out;
        };

        const auto ref_d = mean_series(ref_traces, TraceMetric::d_efficiency);
        const auto ref_ccm = ccm_series(ref_traces);

        for (const auto& strategy_name : cfg.strategies) {
          if (strategy_name == cfg.reference_strategy) continue;
          const auto traces = units_of(static_cast<int>(ii), strategy_name);
          if (traces.empty()) continue;

          if (!ref_d.empty()) {
            const double ref_value = ref_d.back().second;
            const auto hit = crossover_budget(mean_series(traces, TraceMetric::d_efficiency), ref_value);
            f << ii << ',' << strategy_name << ",d_efficiency," << cfg.reference_strategy << ','
              << fmt(ref_value) << ',' << (hit ? std::to_string(*hit) : "none") << '\n';
          }
          if (!ref_ccm.empty()) {
            const double ref_value = ref_ccm.back().second;
            const auto hit = crossover_budget(ccm_series(traces), ref_value);
            f << ii << ',' << strategy_name << ",ccm," << cfg.reference_strategy << ','
              << fmt(ref_value) << ',' << (hit ? std::to_string(*hit) : "none") << '\n';
          }
        }
      }
    }
  }

  // runtime.csv: wall-clock statistics; kept out of steps.csv so that file
  // stays byte-reproducible.
  {
    std::ofstream f(fs::path(cfg.out_dir) / "runtime.csv");
    f << "strategy,budget,mean_ms,std_ms,units\n";
    for (const auto& strategy_name : cfg.strategies) {
      std::vector<double> ms;
      for (const auto& u : units) {
        if (u.strategy == strategy_name && !u.trace.failed) ms.push_back(u.trace.duration_ms);
      }
      if (ms.empty()) continue;
      f << strategy_name << ',' << cfg.pool.budget << ',' << fmt(mean_of(ms)) << ','
        << fmt(std_of(ms)) << ',' << ms.size() << '\n';
    }
  }

  {
    std::ofstream f(fs::path(cfg.out_dir) / "run_manifest.json");
    json manifest;
    manifest["tool"] = "eagle";
    manifest["version"] = "0.1.0";
    manifest["config"] = json::parse(cfg.to_json_text());
    manifest["outputs"] = {"steps.csv", "stability.csv", "crossover.csv", "runtime.csv"};
    manifest["failures"] = failures;
    f << manifest.dump(2) << '\n';
  }

  return failures;
}

int run_validate_theory(const ExperimentConfig& base_cfg) {
  base_cfg.validate();
  if (!base_cfg.theory_mode) {
    throw std::invalid_argument("validate-theory requires theory_mode = true");
  }
  namespace fs = std::filesystem;
  fs::create_directories(base_cfg.out_dir);

  const TheoryConfig& tc = base_cfg.theory;
  int violations = 0;
  json report;
  report["prior"] = {{"n0", base_cfg.n0}, {"sigma0_sq", base_cfg.sigma0_sq}, {"lambda", 1.0}};

  // Runs one theory-mode EAGLE unit and returns its trace.
  const auto run_unit = [&](int d, int budget, double sigma, std::uint64_t seed,
                            int pool_size) -> RunTrace {
    ExperimentConfig cfg = base_cfg;
    cfg.dim = d;
    cfg.pool.budget = budget;
    cfg.pool.pool_size = pool_size;
    cfg.pool.batch_size = std::min(cfg.pool.batch_size, pool_size);
    cfg.blackbox.kind = "synthetic_linear";
    cfg.blackbox.sigma = sigma;
    cfg.blackbox.phi_star = default_phi_star(d);
    cfg.instances.assign(1, Eigen::VectorXd::Zero(d));
    cfg.kernel_width.reset();
    auto blackbox = make_blackbox(cfg, seed);
    return explain_instance(cfg, cfg.instances.front(), *blackbox,
                            AcquisitionStrategy::from_name("eagle"), seed)
        .trace;
  };

  // Cumulative information-gain bound across dims × budgets × seeds.
  json gain_section = json::array();
  std::map<std::pair<int, int>, std::vector<RunTrace>> gain_traces;
  for (int d : tc.dims) {
    for (int budget : tc.budgets) {
      int satisfied = 0;
      double min_slack = std::numeric_limits<double>::infinity();
      auto& traces = gain_traces[{d, budget}];
      for (int s = 0; s < tc.seeds; ++s) {
        const std::uint64_t seed =
            unit_seed(base_cfg.base_seed, d * 1000 + budget, "theory_gain", s);
        RunTrace trace = run_unit(d, budget, tc.sigma, seed, tc.pool_size);
        const BoundCheckResult res = check_info_gain_bound(trace, d);
        if (res.satisfied) {
          ++satisfied;
        } else {
          ++violations;
        }
        min_slack = std::min(min_slack, res.slack);

        const double telescoped = 0.5 * (trace.logdet_v0 - trace.steps.back().logdet_v);
        if (std::fabs(trace.steps.back().cumulative_eig - telescoped) > 1e-7) ++violations;
        traces.push_back(std::move(trace));
      }
      // Averaged cumulative-gain curve should flatten: diminishing returns.
      // Evaluated per batch; inside a batch the picks are score-ordered, which
      // scallops the per-step curve.
      std::vector<double> mean_cig;
      for (std::size_t c = 0; c < traces.front().checkpoints.size(); ++c) {
        const int t = traces.front().checkpoints[c].t;
        double acc = 0.0;
        for (const auto& tr : traces) acc += tr.steps[t - 1].cumulative_eig;
        mean_cig.push_back(acc / tc.seeds);
      }
      double max_second_diff = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 2; i < mean_cig.size(); ++i) {
        max_second_diff =
            std::max(max_second_diff, mean_cig[i] - 2 * mean_cig[i - 1] + mean_cig[i - 2]);
      }
      gain_section.push_back({{"d", d},
                              {"budget", budget},
                              {"seeds", tc.seeds},
                              {"satisfied", satisfied},
                              {"min_slack", min_slack},
                              {"max_cig_second_difference", max_second_diff}});
    }
  }
  report["information_gain_bound"] = std::move(gain_section);

  // Estimation-error bound: empirical violation frequency vs delta.
  json estimation_section = json::array();
  for (int d : tc.estimation_dims) {
    for (double sigma : tc.estimation_sigmas) {
      for (double delta : tc.estimation_deltas) {
        int violated = 0;
        for (int trial = 0; trial < tc.estimation_trials; ++trial) {
          const std::uint64_t seed = unit_seed(
              base_cfg.base_seed, d, "theory_estimation_" + std::to_string(sigma), trial);
          RunTrace trace = run_unit(d, tc.estimation_budget, sigma, seed, tc.estimation_pool);
          TheoryParams params;
          params.sigma = sigma;
          params.delta = delta;
          params.dim = d;
          params.nu_acc = tc.nu_acc;
          const BoundCheckResult res =
              check_estimation_bound(trace, default_phi_star(d), params);
          if (!res.satisfied) ++violated;
        }
        const double rate = static_cast<double>(violated) / tc.estimation_trials;
        const double threshold =
            delta + 3.0 * std::sqrt(delta * (1.0 - delta) / tc.estimation_trials);
        const bool pass = rate <= threshold;
        if (!pass) ++violations;
        estimation_section.push_back({{"d", d},
                                      {"sigma", sigma},
                                      {"delta", delta},
                                      {"trials", tc.estimation_trials},
                                      {"violations", violated},
                                      {"violation_rate", rate},
                                      {"threshold", threshold},
                                      {"pass", pass}});
      }
    }
  }
  report["estimation_bound"] = std::move(estimation_section);

  // Design richness and the resulting query-count estimate, validated on the
  // traces already collected for the first (d, largest budget) cell.
  {
    const int d = tc.dims.front();
    const int budget = tc.budgets.back();
    const auto& traces = gain_traces[{d, budget}];
    double kappa = std::numeric_limits<double>::infinity();
    for (const auto& tr : traces) kappa = std::min(kappa, kappa_hat_from_trace(tr));

    TheoryParams params;
    params.sigma = tc.sigma;
    params.delta = 0.1;
    params.nu_acc = tc.nu_acc;
    params.dim = d;
    params.kappa_hat = kappa;
    params.phi_star_norm = default_phi_star(d).norm();
    const std::optional<long> needed = sample_complexity_estimate(params);

    json sc;
    sc["d"] = d;
    sc["kappa_hat"] = kappa;
    sc["nu_acc"] = tc.nu_acc;
    sc["delta"] = params.delta;
    sc["estimate_t"] = needed ? json(*needed) : json("unbounded");
    if (needed) {
      const int check_t = static_cast<int>(std::min<long>(*needed, budget));
      if (check_t > 0) {
        int hits = 0;
        for (const auto& tr : traces) {
          Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(d, d);
          Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
          for (int i = 0; i < check_t; ++i) {
            const auto& rec = tr.steps[i];
            precision.noalias() += rec.weight * (rec.z * rec.z.transpose());
            rhs.noalias() += rec.weight * rec.y * rec.z;
          }
          const Eigen::VectorXd phi_hat = precision.llt().solve(rhs);
          if ((phi_hat - default_phi_star(d)).norm() <= tc.nu_acc) ++hits;
        }
        sc["checked_at_t"] = check_t;
        sc["accuracy_hit_fraction"] = static_cast<double>(hits) / traces.size();
        sc["estimate_within_budget"] = *needed <= budget;
      }
    }
    report["sample_complexity"] = std::move(sc);
  }

  report["total_violations"] = violations;
  std::ofstream f(fs::path(base_cfg.out_dir) / "theory_report.json");
  f << report.dump(2) << '\n';
  return violations;
}

int compare_result_dirs(const std::string& dir_a, const std::string& dir_b, double tol) {
  namespace fs = std::filesystem;
  int mismatches = 0;
  for (const char* name : {"steps.csv", "stability.csv", "crossover.csv"}) {
    const fs::path pa = fs::path(dir_a) / name;
    const fs::path pb = fs::path(dir_b) / name;
    if (!fs::exists(pa) || !fs::exists(pb)) {
      std::fprintf(stderr, "compare: %s missing on one side\n", name);
      ++mismatches;
      continue;
    }
    std::ifstream fa(pa), fb(pb);
    std::string la, lb;
    int line = 0;
    bool file_ok = true;
    for (;;) {
      const bool ga = static_cast<bool>(std::getline(fa, la));
      const bool gb = static_cast<bool>(std::getline(fb, lb));
      ++line;
      if (!ga && !gb) break;
      if (ga != gb) {
        std::fprintf(stderr, "compare: %s differs in length at line %d\n", name, line);
        file_ok = false;
        break;
      }
      if (la == lb) continue;
      if (tol <= 0.0) {
        std::fprintf(stderr, "compare: %s line %d differs\n  a: %s\n  b: %s\n", name, line,
                     la.c_str(), lb.c_str());
        file_ok = false;
        break;
      }
      // Field-wise numeric comparison under the tolerance.
      std::istringstream sa(la), sb(lb);
      std::string ta, tb;
      bool row_ok = true;
      while (row_ok) {
        const bool ha = static_cast<bool>(std::getline(sa, ta, ','));
        const bool hb = static_cast<bool>(std::getline(sb, tb, ','));
        if (ha != hb) row_ok = false;
        if (!ha || !hb) break;
        if (ta == tb) continue;
        try {
          if (std::fabs(std::stod(ta) - std::stod(tb)) > tol) row_ok = false;
        } catch (const std::exception&) {
          row_ok = false;
        }
      }
      if (!row_ok) {
        std::fprintf(stderr, "compare: %s line %d differs beyond tol\n  a: %s\n  b: %s\n", name,
                     line, la.c_str(), lb.c_str());
        file_ok = false;
        break;
      }
    }
    if (!file_ok) ++mismatches;
  }
  return mismatches;
}

}  // namespace eagle
