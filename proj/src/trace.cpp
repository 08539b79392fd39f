#include "eagle/trace.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace eagle {

namespace {

using json = nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vec_from_json(const json& j) {
  const auto vals = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace

void RunTrace::validate() const {
  double cum = 0.0;
  double prev_logdet = logdet_v0;
  for (const auto& s : steps) {
    cum += s.step_eig;
    if (std::fabs(cum - s.cumulative_eig) > 1e-9 * (1.0 + std::fabs(cum))) {
      throw std::logic_error("RunTrace: cumulative_eig is not the prefix sum of step_eig at t=" +
                             std::to_string(s.t));
    }
    if (s.logdet_v > prev_logdet + 1e-12) {
      throw std::logic_error("RunTrace: log|V| increased at t=" + std::to_string(s.t));
    }
    prev_logdet = s.logdet_v;
  }
}

std::string trace_to_json(const RunTrace& trace) {
  json j;
  j["dim"] = trace.dim;
  j["strategy"] = trace.strategy;
  j["rng_seed"] = trace.rng_seed;
  j["prior"] = {{"n0", trace.prior.n0},
                {"sigma0_sq", trace.prior.sigma0_sq},
                {"lambda", trace.prior.lambda}};
  j["theory_mode"] = trace.theory_mode;
  j["logdet_v0"] = trace.logdet_v0;
  j["trace_v0"] = trace.trace_v0;
  j["label_queries"] = trace.label_queries;
  j["model_evaluations"] = trace.model_evaluations;
  j["duration_ms"] = trace.duration_ms;
  j["failed"] = trace.failed;
  j["failure"] = trace.failure;

  json steps = json::array();
  for (const auto& s : trace.steps) {
    steps.push_back({{"t", s.t},
                     {"z", vec_to_json(s.z)},
                     {"weight", s.weight},
                     {"y", s.y},
                     {"score", s.score},
                     {"logdet_v", s.logdet_v},
                     {"trace_v", s.trace_v},
                     {"step_eig", s.step_eig},
                     {"cumulative_eig", s.cumulative_eig}});
  }
  j["steps"] = std::move(steps);

  json checkpoints = json::array();
  for (const auto& c : trace.checkpoints) {
    checkpoints.push_back(
        {{"t", c.t}, {"phi", vec_to_json(c.phi)}, {"s2", c.s2}, {"ci_width_90", c.ci_width_90}});
  }
  j["checkpoints"] = std::move(checkpoints);

  if (trace.final_posterior) {
    const auto& p = *trace.final_posterior;
    json v_rows = json::array();
    for (int r = 0; r < p.dim(); ++r) {
      json row = json::array();
      for (int c = 0; c < p.dim(); ++c) row.push_back(p.v().entries()(r, c));
      v_rows.push_back(std::move(row));
    }
    j["final_posterior"] = {{"phi_hat", vec_to_json(p.phi_hat())},
                            {"v", std::move(v_rows)},
                            {"s2", p.s2()},
                            {"n_obs", p.n_obs()}};
  }
  return j.dump();
}

RunTrace trace_from_json(const std::string& text) {
  const json j = json::parse(text);
  RunTrace trace;
  trace.dim = j.at("dim").get<int>();
  trace.strategy = j.at("strategy").get<std::string>();
  trace.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  trace.prior.n0 = j.at("prior").at("n0").get<double>();
  trace.prior.sigma0_sq = j.at("prior").at("sigma0_sq").get<double>();
  trace.prior.lambda = j.at("prior").at("lambda").get<double>();
  trace.theory_mode = j.at("theory_mode").get<bool>();
  trace.logdet_v0 = j.at("logdet_v0").get<double>();
  trace.trace_v0 = j.at("trace_v0").get<double>();
  trace.label_queries = j.at("label_queries").get<long>();
  trace.model_evaluations = j.at("model_evaluations").get<long>();
  trace.duration_ms = j.at("duration_ms").get<double>();
  trace.failed = j.at("failed").get<bool>();
  trace.failure = j.at("failure").get<std::string>();

  for (const auto& s : j.at("steps")) {
    StepRecord rec;
    rec.t = s.at("t").get<int>();
    rec.z = vec_from_json(s.at("z"));
    rec.weight = s.at("weight").get<double>();
    rec.y = s.at("y").get<double>();
    rec.score = s.at("score").get<double>();
    rec.logdet_v = s.at("logdet_v").get<double>();
    rec.trace_v = s.at("trace_v").get<double>();
    rec.step_eig = s.at("step_eig").get<double>();
    rec.cumulative_eig = s.at("cumulative_eig").get<double>();
    trace.steps.push_back(std::move(rec));
  }
  for (const auto& c : j.at("checkpoints")) {
    TraceCheckpoint cp;
    cp.t = c.at("t").get<int>();
    cp.phi = vec_from_json(c.at("phi"));
    cp.s2 = c.at("s2").get<double>();
    cp.ci_width_90 = c.at("ci_width_90").get<double>();
    trace.checkpoints.push_back(std::move(cp));
  }
  if (j.contains("final_posterior")) {
    const auto& p = j.at("final_posterior");
    const Eigen::VectorXd phi = vec_from_json(p.at("phi_hat"));
    const int d = static_cast<int>(phi.size());
    Eigen::MatrixXd v(d, d);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) v(r, c) = p.at("v").at(r).at(c).get<double>();
    }
    v = ((v + v.transpose()) / 2.0).eval();
    trace.final_posterior.emplace(phi, SpdMatrix::from_matrix(v), p.at("s2").get<double>(),
                                  trace.prior, p.at("n_obs").get<int>());
  }
  return trace;
}

}  // namespace eagle
