#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "eagle/spd_matrix.hpp"
#include "eagle/trace.hpp"

namespace eagle {

// Mean pairwise Jaccard overlap of the top-k features (by |importance|,
// ties broken by feature index) across repeated runs.
double jaccard_topk(const std::vector<Eigen::VectorXd>& runs, int k);

// (|V0|/|Vt|)^{1/d}: geometric shrinkage of the posterior ellipsoid volume.
double d_efficiency(const SpdMatrix& v0, const SpdMatrix& vt);
double d_efficiency_from_logdets(double logdet_v0, double logdet_vt, int dim);

// Tr(V0)/Tr(Vt): shrinkage of the total marginal variance.
double a_efficiency(const SpdMatrix& v0, const SpdMatrix& vt);

struct ConsistencyResult {
  double ccm = 0.0;   // (1 − asfe) · ars
  double asfe = 0.0;  // mean per-feature binary sign entropy across runs
  double ars = 0.0;   // mean pairwise (Spearman of |importance| ranks + 1)/2
};

ConsistencyResult ccm(const std::vector<Eigen::VectorXd>& runs);

// Spearman rank correlation with average ranks for ties.
double spearman(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

enum class TraceMetric { d_efficiency, a_efficiency, cumulative_information_gain };

// Smallest t in the series with value ≥ reference, or nullopt.
std::optional<int> crossover_budget(const std::vector<std::pair<int, double>>& series,
                                    double reference);
std::optional<int> crossover_budget(const RunTrace& trace, double reference, TraceMetric metric);

// Per-step metric series of one trace, as (t, value) pairs.
std::vector<std::pair<int, double>> metric_series(const RunTrace& trace, TraceMetric metric);

}  // namespace eagle
