#include "eagle/sampling.hpp"

#include <cmath>
#include <stdexcept>

namespace eagle {

LocalityKernel::LocalityKernel(Eigen::VectorXd x0, double width) : x0_(std::move(x0)), width_(width) {
  if (x0_.size() == 0) throw std::invalid_argument("LocalityKernel: empty instance vector");
  if (!(width_ > 0.0)) throw std::invalid_argument("LocalityKernel: width must be positive");
}

double LocalityKernel::default_width(int dim) { return 0.75 * std::sqrt(static_cast<double>(dim)); }

double LocalityKernel::weight(const Eigen::VectorXd& z) const {
  if (z.size() != x0_.size()) throw std::invalid_argument("LocalityKernel: dimension mismatch");
  return std::exp(-(z - x0_).squaredNorm() / (width_ * width_));
}

void PoolConfig::validate(int dim) const {
  if (pool_size <= 0 || seed_count <= 0 || batch_size <= 0 || budget <= 0) {
    throw std::invalid_argument("PoolConfig: sizes must be positive");
  }
  if (seed_count > budget) throw std::invalid_argument("PoolConfig: seed_count exceeds budget");
  if (batch_size > pool_size) throw std::invalid_argument("PoolConfig: batch_size exceeds pool_size");
  if (perturb_scale.size() != 0 && perturb_scale.size() != dim) {
    throw std::invalid_argument("PoolConfig: perturb_scale dimension mismatch");
  }
  if (perturb_scale.size() != 0 && (perturb_scale.array() < 0.0).any()) {
    throw std::invalid_argument("PoolConfig: perturb_scale must be nonnegative");
  }
}

Eigen::VectorXd PoolConfig::resolved_scale(int dim) const {
  if (perturb_scale.size() == 0) return Eigen::VectorXd::Ones(dim);
  return perturb_scale;
}

std::vector<Eigen::VectorXd> draw_perturbations(const LocalityKernel& kernel,
                                                const PoolConfig& cfg, int count, RngStream& rng) {
  const int d = kernel.dim();
  cfg.validate(d);
  const Eigen::VectorXd scale = cfg.resolved_scale(d);
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd z(d);
    for (int j = 0; j < d; ++j) z(j) = kernel.x0()(j) + scale(j) * rng.gaussian();
    out.push_back(std::move(z));
  }
  return out;
}

std::vector<Eigen::VectorXd> draw_pool(const LocalityKernel& kernel, const PoolConfig& cfg,
                                       RngStream& rng) {
  return draw_perturbations(kernel, cfg, cfg.pool_size, rng);
}

std::vector<Eigen::VectorXd> glime_pool(const LocalityKernel& kernel, const PoolConfig& cfg,
                                        RngStream& rng) {
  const int d = kernel.dim();
  cfg.validate(d);
  const double sd = kernel.width() / std::sqrt(2.0);
  std::vector<Eigen::VectorXd> out;
  out.reserve(cfg.pool_size);
  for (int i = 0; i < cfg.pool_size; ++i) {
    Eigen::VectorXd z(d);
    for (int j = 0; j < d; ++j) z(j) = kernel.x0()(j) + sd * rng.gaussian();
    out.push_back(std::move(z));
  }
  return out;
}

}  // namespace eagle
