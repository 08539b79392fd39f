#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eagle/surrogate.hpp"

namespace eagle {

// One labeled query in selection order. step_eig and the covariance
// summaries are maintained by sequential rank-1 updates from the prior, so
// cumulative_eig always telescopes against logdet_v.
struct StepRecord {
  int t = 0;                  // 1-based query index, seeds included
  Eigen::VectorXd z;
  double weight = 0.0;        // π(z), clamped to [0,1]
  double y = 0.0;             // black-box response
  double score = 0.0;         // acquisition score at selection (0 for seeds)
  double logdet_v = 0.0;      // log|V_t| after absorbing this query
  double trace_v = 0.0;       // Tr(V_t) after absorbing this query
  double step_eig = 0.0;      // ½·log(1 + π·zᵀV_{t−1}z)
  double cumulative_eig = 0.0;
};

// Posterior snapshot taken at each batch boundary (after the dense refit).
struct TraceCheckpoint {
  int t = 0;
  Eigen::VectorXd phi;
  double s2 = 0.0;
  double ci_width_90 = 0.0;  // mean 90% credible-interval width
};

// Full record of one explanation run.
struct RunTrace {
  int dim = 0;
  std::string strategy;
  std::uint64_t rng_seed = 0;
  PriorSpec prior;
  bool theory_mode = false;

  double logdet_v0 = 0.0;
  double trace_v0 = 0.0;

  std::vector<StepRecord> steps;
  std::vector<TraceCheckpoint> checkpoints;
  std::optional<SurrogatePosterior> final_posterior;

  long label_queries = 0;      // queries whose responses entered the fit
  long model_evaluations = 0;  // every prediction served, scoring probes included
  double duration_ms = 0.0;

  bool failed = false;
  std::string failure;

  // Enforces the bookkeeping invariants: cumulative_eig is the prefix sum of
  // step_eig and log|V| never increases. Throws std::logic_error otherwise.
  void validate() const;
};

std::string trace_to_json(const RunTrace& trace);
RunTrace trace_from_json(const std::string& text);

}  // namespace eagle
