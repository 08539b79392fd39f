#include "eagle/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace eagle {

AcquisitionStrategy AcquisitionStrategy::from_name(const std::string& name) {
  AcquisitionStrategy s;
  if (name == "eagle") {
    s.kind = Kind::eagle;
  } else if (name == "predictive_variance") {
    s.kind = Kind::predictive_variance;
  } else if (name == "uniform_random") {
    s.kind = Kind::uniform_random;
  } else if (name == "kernel_proportional") {
    s.kind = Kind::kernel_proportional;
  } else if (name == "boundary_uncertainty") {
    s.kind = Kind::boundary_uncertainty;
  } else {
    throw std::invalid_argument("unknown acquisition strategy: " + name);
  }
  return s;
}

const char* AcquisitionStrategy::name() const {
  switch (kind) {
    case Kind::eagle:
      return "eagle";
    case Kind::predictive_variance:
      return "predictive_variance";
    case Kind::uniform_random:
      return "uniform_random";
    case Kind::kernel_proportional:
      return "kernel_proportional";
    case Kind::boundary_uncertainty:
      return "boundary_uncertainty";
  }
  return "unknown";
}

double eagle_score(const SurrogatePosterior& post, const LocalityKernel& kernel,
                   const Eigen::VectorXd& z) {
  if (z.size() != post.dim()) throw std::invalid_argument("eagle_score: dimension mismatch");
  return kernel.weight(z) * post.v().quad_form(z);
}

double step_information_gain(const SurrogatePosterior& post, const LocalityKernel& kernel,
                             const Eigen::VectorXd& z) {
  if (z.size() != post.dim()) {
    throw std::invalid_argument("step_information_gain: dimension mismatch");
  }
  return 0.5 * std::log1p(kernel.weight(z) * post.v().quad_form(z));
}

namespace {

double variance_proxy_score(const SurrogatePosterior& post, const Eigen::VectorXd& z,
                            bool* warned) {
  if (post.nu() > 2.0) return predictive_variance(post, z);
  if (!*warned) {
    std::fprintf(stderr,
                 "warning: predictive variance undefined for nu = %g <= 2; "
                 "falling back to (zᵀVz + 1)·s² ordering\n",
                 post.nu());
    *warned = true;
  }
  return (post.v().quad_form(z) + 1.0) * post.s2();
}

std::vector<ScoredCandidate> top_by_score(std::vector<ScoredCandidate> scored, int batch_size) {
  std::sort(scored.begin(), scored.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.pool_index < b.pool_index;
  });
  scored.resize(batch_size);
  return scored;
}

}  // namespace

std::vector<ScoredCandidate> select_batch(const SurrogatePosterior& post,
                                          const LocalityKernel& kernel,
                                          const AcquisitionStrategy& strategy,
                                          const std::vector<Eigen::VectorXd>& pool, int batch_size,
                                          BlackBox* blackbox, RngStream* rng) {
  using Kind = AcquisitionStrategy::Kind;

  if (pool.empty()) throw std::invalid_argument("select_batch: empty candidate pool");
  if (batch_size <= 0 || batch_size > static_cast<int>(pool.size())) {
    throw std::invalid_argument("select_batch: batch size must lie in [1, pool size]");
  }
  const bool needs_rng =
      strategy.kind == Kind::uniform_random || strategy.kind == Kind::kernel_proportional;
  if (needs_rng && rng == nullptr) {
    throw std::invalid_argument("select_batch: strategy requires a random stream");
  }
  if (strategy.kind == Kind::boundary_uncertainty && blackbox == nullptr) {
    throw std::invalid_argument("select_batch: strategy requires a black box but none supplied");
  }

  std::vector<ScoredCandidate> scored;
  scored.reserve(pool.size());

  switch (strategy.kind) {
    case Kind::eagle: {
      if (strategy.intra_batch_updates) {
        // Sequential greedy: commit each pick into a working covariance so the
        // next pick sees the shrunken uncertainty.
        SpdMatrix v_work = post.v();
        std::vector<bool> taken(pool.size(), false);
        std::vector<ScoredCandidate> picked;
        picked.reserve(batch_size);
        for (int b = 0; b < batch_size; ++b) {
          int best = -1;
          double best_score = -1.0;
          for (std::size_t i = 0; i < pool.size(); ++i) {
            if (taken[i]) continue;
            const double s = kernel.weight(pool[i]) * v_work.quad_form(pool[i]);
            if (best < 0 || s > best_score) {
              best = static_cast<int>(i);
              best_score = s;
            }
          }
          taken[best] = true;
          picked.push_back({pool[best], best_score, best, std::nullopt});
          v_work = rank1_downdate_covariance(v_work, pool[best], kernel.weight(pool[best]));
        }
        return picked;
      }
      for (std::size_t i = 0; i < pool.size(); ++i) {
        scored.push_back({pool[i], eagle_score(post, kernel, pool[i]), static_cast<int>(i), std::nullopt});
      }
      break;
    }
    case Kind::predictive_variance: {
      bool warned = false;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        scored.push_back(
            {pool[i], variance_proxy_score(post, pool[i], &warned), static_cast<int>(i), std::nullopt});
      }
      break;
    }
    case Kind::uniform_random: {
      // Top-B of i.i.d. uniform scores is a uniform subsample without replacement.
      for (std::size_t i = 0; i < pool.size(); ++i) {
        scored.push_back({pool[i], rng->uniform01(), static_cast<int>(i), std::nullopt});
      }
      break;
    }
    case Kind::kernel_proportional: {
      // Gumbel top-k: argtop of log π(z) + Gumbel noise samples without
      // replacement with probability proportional to π(z).
      for (std::size_t i = 0; i < pool.size(); ++i) {
        const double gumbel = -std::log(-std::log(rng->uniform01()));
        scored.push_back(
            {pool[i], std::log(kernel.weight(pool[i])) + gumbel, static_cast<int>(i), std::nullopt});
      }
      break;
    }
    case Kind::boundary_uncertainty: {
      const std::vector<double> ys = blackbox->batch_predict(pool);
      for (std::size_t i = 0; i < pool.size(); ++i) {
        const double locality = std::exp(-(pool[i] - kernel.x0()).norm());
        scored.push_back(
            {pool[i], -std::fabs(ys[i] - 0.5) * locality, static_cast<int>(i), ys[i]});
      }
      break;
    }
  }

  return top_by_score(std::move(scored), batch_size);
}

double exact_eig_batch_oracle(const SurrogatePosterior& post, const LocalityKernel& kernel,
                              const std::vector<Eigen::VectorXd>& subset) {
  SpdMatrix v = post.v();
  double total = 0.0;
  for (const auto& z : subset) {
    const double w = kernel.weight(z);
    total += 0.5 * logdet_ratio_after_update(v, z, w);
    v = rank1_downdate_covariance(v, z, w);
  }
  return total;
}

}  // namespace eagle
