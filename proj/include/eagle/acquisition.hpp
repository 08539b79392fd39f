#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eagle/blackbox.hpp"
#include "eagle/rng.hpp"
#include "eagle/sampling.hpp"
#include "eagle/surrogate.hpp"

namespace eagle {

// Scoring rule used to rank candidate perturbations.
//   eagle:                locality-weighted posterior uncertainty π(z)·zᵀVz
//   predictive_variance:  Student-t predictive variance (no locality term)
//   uniform_random:       seeded uniform subsample
//   kernel_proportional:  seeded subsample with probability ∝ π(z)
//   boundary_uncertainty: −|f_b(z) − 0.5|·exp(−‖z−x0‖), needs the black box
struct AcquisitionStrategy {
  enum class Kind {
    eagle,
    predictive_variance,
    uniform_random,
    kernel_proportional,
    boundary_uncertainty,
  };

  Kind kind = Kind::eagle;
  // Apply rank-1 posterior updates between picks inside one batch instead of
  // ranking the whole batch by the batch-start score. Off by default.
  bool intra_batch_updates = false;

  static AcquisitionStrategy from_name(const std::string& name);
  const char* name() const;
};

struct ScoredCandidate {
  Eigen::VectorXd z;
  double score = 0.0;
  int pool_index = 0;
  // Response probed during scoring, if the strategy had to query the model;
  // lets the caller reuse it instead of paying a second query.
  std::optional<double> cached_response;
};

// π(z) · zᵀVz — maximizing this is equivalent to maximizing the exact
// per-candidate expected information gain (the log transform is monotone).
double eagle_score(const SurrogatePosterior& post, const LocalityKernel& kernel,
                   const Eigen::VectorXd& z);

// Exact per-candidate expected information gain, ½·log(1 + π(z)·zᵀVz).
double step_information_gain(const SurrogatePosterior& post, const LocalityKernel& kernel,
                             const Eigen::VectorXd& z);

// The batch_size highest-scoring candidates under the strategy, ties broken
// by ascending pool index. uniform_random and kernel_proportional need rng;
// boundary_uncertainty needs the black box.
std::vector<ScoredCandidate> select_batch(const SurrogatePosterior& post,
                                          const LocalityKernel& kernel,
                                          const AcquisitionStrategy& strategy,
                                          const std::vector<Eigen::VectorXd>& pool, int batch_size,
                                          BlackBox* blackbox = nullptr, RngStream* rng = nullptr);

// Set-level information gain of appending the whole subset,
// ½(log|V| − log|V_subset|), by sequential determinant-lemma updates.
// Intended as a reference for small subsets (≤ ~10 points).
double exact_eig_batch_oracle(const SurrogatePosterior& post, const LocalityKernel& kernel,
                              const std::vector<Eigen::VectorXd>& subset);

}  // namespace eagle
