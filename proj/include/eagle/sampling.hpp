#pragma once

#include <vector>

#include <Eigen/Dense>

#include "eagle/rng.hpp"

namespace eagle {

// Exponential locality kernel around the instance being explained:
//   weight(z) = exp(−‖z − x0‖₂² / width²) ∈ (0,1], equal to 1 at z = x0.
class LocalityKernel {
 public:
  LocalityKernel(Eigen::VectorXd x0, double width);

  static double default_width(int dim);  // 0.75·√d

  double weight(const Eigen::VectorXd& z) const;

  const Eigen::VectorXd& x0() const { return x0_; }
  double width() const { return width_; }
  int dim() const { return static_cast<int>(x0_.size()); }

 private:
  Eigen::VectorXd x0_;
  double width_;
};

// Budgets of one explanation run: S seeds, batches of B from pools of A,
// up to N queries total. perturb_scale is the per-feature standard
// deviation of the Gaussian perturbation sampler.
struct PoolConfig {
  int pool_size = 1000;
  int seed_count = 10;
  int batch_size = 10;
  int budget = 500;
  Eigen::VectorXd perturb_scale;  // empty means all-ones
  std::uint64_t rng_seed = 0;

  void validate(int dim) const;
  Eigen::VectorXd resolved_scale(int dim) const;
};

// `count` independent Gaussian perturbations, coordinate j drawn as
// x0[j] + perturb_scale[j]·N(0,1). Deterministic given the stream state.
std::vector<Eigen::VectorXd> draw_perturbations(const LocalityKernel& kernel,
                                                const PoolConfig& cfg, int count, RngStream& rng);

// Candidate pool of cfg.pool_size perturbations.
std::vector<Eigen::VectorXd> draw_pool(const LocalityKernel& kernel, const PoolConfig& cfg,
                                       RngStream& rng);

// Pool drawn from N(x0, (width²/2)·I) so that the sample density is
// proportional to the locality kernel itself.
std::vector<Eigen::VectorXd> glime_pool(const LocalityKernel& kernel, const PoolConfig& cfg,
                                        RngStream& rng);

}  // namespace eagle
