#include "eagle/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace eagle {

namespace {

// Indices of the k largest |values|, ties broken by ascending feature index.
std::set<int> topk_indices(const Eigen::VectorXd& values, int k) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double ma = std::fabs(values(a));
    const double mb = std::fabs(values(b));
    if (ma != mb) return ma > mb;
    return a < b;
  });
  return std::set<int>(order.begin(), order.begin() + k);
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

Eigen::VectorXd average_ranks(const Eigen::VectorXd& values) {
  const int n = static_cast<int>(values.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return values(a) < values(b); });
  Eigen::VectorXd ranks(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && values(order[j + 1]) == values(order[i])) ++j;
    const double rank = (i + j) / 2.0 + 1.0;  // 1-based average rank over the tie block
    for (int k = i; k <= j; ++k) ranks(order[k]) = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double jaccard_topk(const std::vector<Eigen::VectorXd>& runs, int k) {
  if (runs.size() < 2) throw std::invalid_argument("jaccard_topk: need at least two runs");
  const int d = static_cast<int>(runs.front().size());
  if (k < 1 || k > d) throw std::invalid_argument("jaccard_topk: k must lie in [1, d]");

  std::vector<std::set<int>> sets;
  sets.reserve(runs.size());
  for (const auto& r : runs) {
    if (r.size() != d) throw std::invalid_argument("jaccard_topk: run dimension mismatch");
    sets.push_back(topk_indices(r, k));
  }

  double acc = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      std::vector<int> inter;
      std::set_intersection(sets[i].begin(), sets[i].end(), sets[j].begin(), sets[j].end(),
                            std::back_inserter(inter));
      const double union_size = static_cast<double>(sets[i].size() + sets[j].size() - inter.size());
      acc += inter.size() / union_size;
      ++pairs;
    }
  }
  return acc / pairs;
}

double d_efficiency(const SpdMatrix& v0, const SpdMatrix& vt) {
  if (v0.dim() != vt.dim()) throw std::invalid_argument("d_efficiency: dimension mismatch");
  return d_efficiency_from_logdets(v0.log_det(), vt.log_det(), v0.dim());
}

double d_efficiency_from_logdets(double logdet_v0, double logdet_vt, int dim) {
  return std::exp((logdet_v0 - logdet_vt) / dim);
}

double a_efficiency(const SpdMatrix& v0, const SpdMatrix& vt) {
  if (v0.dim() != vt.dim()) throw std::invalid_argument("a_efficiency: dimension mismatch");
  return v0.trace() / vt.trace();
}

double spearman(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("spearman: vectors must share a length of at least 2");
  }
  const Eigen::VectorXd ra = average_ranks(a);
  const Eigen::VectorXd rb = average_ranks(b);
  const double mean_a = ra.mean();
  const double mean_b = rb.mean();
  const Eigen::VectorXd ca = ra.array() - mean_a;
  const Eigen::VectorXd cb = rb.array() - mean_b;
  const double denom = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
  if (denom == 0.0) return 1.0;  // all ranks tied on both sides
  return ca.dot(cb) / denom;
}

ConsistencyResult ccm(const std::vector<Eigen::VectorXd>& runs) {
  if (runs.size() < 2) throw std::invalid_argument("ccm: need at least two runs");
  const int d = static_cast<int>(runs.front().size());
  const int r = static_cast<int>(runs.size());

  double asfe = 0.0;
  for (int j = 0; j < d; ++j) {
    int positives = 0;
    for (const auto& run : runs) {
      if (run.size() != d) throw std::invalid_argument("ccm: run dimension mismatch");
      if (run(j) >= 0.0) ++positives;
    }
    asfe += binary_entropy(static_cast<double>(positives) / r);
  }
  asfe /= d;

  double ars = 0.0;
  int pairs = 0;
  for (int i = 0; i < r; ++i) {
    for (int j = i + 1; j < r; ++j) {
      ars += (spearman(runs[i].cwiseAbs(), runs[j].cwiseAbs()) + 1.0) / 2.0;
      ++pairs;
    }
  }
  ars /= pairs;

  return {(1.0 - asfe) * ars, asfe, ars};
}

std::optional<int> crossover_budget(const std::vector<std::pair<int, double>>& series,
                                    double reference) {
  for (const auto& [t, value] : series) {
    if (value >= reference) return t;
  }
  return std::nullopt;
}

std::vector<std::pair<int, double>> metric_series(const RunTrace& trace, TraceMetric metric) {
  std::vector<std::pair<int, double>> out;
  out.reserve(trace.steps.size());
  for (const auto& s : trace.steps) {
    double value = 0.0;
    switch (metric) {
      case TraceMetric::d_efficiency:
        value = d_efficiency_from_logdets(trace.logdet_v0, s.logdet_v, trace.dim);
        break;
      case TraceMetric::a_efficiency:
        value = trace.trace_v0 / s.trace_v;
        break;
      case TraceMetric::cumulative_information_gain:
        value = s.cumulative_eig;
        break;
    }
    out.emplace_back(s.t, value);
  }
  return out;
}

std::optional<int> crossover_budget(const RunTrace& trace, double reference, TraceMetric metric) {
  return crossover_budget(metric_series(trace, metric), reference);
}

}  // namespace eagle
