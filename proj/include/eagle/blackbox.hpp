#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

#include "eagle/rng.hpp"

namespace eagle {

// Opaque prediction oracle. query_count() increments by exactly the number
// of predictions served, across both entry points.
class BlackBox {
 public:
  virtual ~BlackBox() = default;

  double predict(const Eigen::VectorXd& z) {
    query_count_.fetch_add(1, std::memory_order_relaxed);
    return do_predict(z);
  }

  std::vector<double> batch_predict(const std::vector<Eigen::VectorXd>& zs) {
    query_count_.fetch_add(static_cast<long>(zs.size()), std::memory_order_relaxed);
    return do_batch_predict(zs);
  }

  long query_count() const { return query_count_.load(std::memory_order_relaxed); }

 protected:
  virtual double do_predict(const Eigen::VectorXd& z) = 0;
  virtual std::vector<double> do_batch_predict(const std::vector<Eigen::VectorXd>& zs) {
    std::vector<double> out;
    out.reserve(zs.size());
    for (const auto& z : zs) out.push_back(do_predict(z));
    return out;
  }

 private:
  std::atomic<long> query_count_{0};
};

// Linear response model y = zᵀφ★ + ε, ε ~ N(0, σ²). Responses are emitted
// raw (not clipped to [0,1]) so that estimation-error checks against φ★
// see exactly the generating model. The noise stream makes outputs
// deterministic per (seed, call index).
class SyntheticLinearModel : public BlackBox {
 public:
  SyntheticLinearModel(Eigen::VectorXd phi_star, double sigma, std::uint64_t seed);

  const Eigen::VectorXd& phi_star() const { return phi_star_; }
  double sigma() const { return sigma_; }

 protected:
  double do_predict(const Eigen::VectorXd& z) override;

 private:
  Eigen::VectorXd phi_star_;
  double sigma_;
  RngStream noise_;
  std::mutex mutex_;
};

// Deterministic nonlinear classifier on two interleaved crescents,
//   y = logistic(sharpness · (distance to crescent A − distance to crescent B)).
// Only the first two coordinates matter; any further coordinates act as
// noise features, which is what the ambient dimension is for.
class MoonsModel : public BlackBox {
 public:
  explicit MoonsModel(double sharpness, int ambient_dim = 2);

  double sharpness() const { return sharpness_; }
  int ambient_dim() const { return ambient_dim_; }

  // Signed distance (positive on crescent B's side of the boundary).
  double signed_distance(double x, double y) const;

 protected:
  double do_predict(const Eigen::VectorXd& z) override;

 private:
  double sharpness_;
  int ambient_dim_;
};

}  // namespace eagle
