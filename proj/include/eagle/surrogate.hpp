#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "eagle/spd_matrix.hpp"

namespace eagle {

// Prior of the weighted Bayesian linear regression: noise dof n0, noise
// scale sigma0_sq, and coefficient prior precision multiplier lambda.
struct PriorSpec {
  double n0 = 1.0;
  double sigma0_sq = 1.0;
  double lambda = 1.0;

  void validate() const;
};

// One perturbation with its locality weight and black-box response.
// Weights are clamped to [0,1]; responses are the model's raw scalar output.
struct LabeledPerturbation {
  Eigen::VectorXd z;
  double weight = 1.0;
  double y = 0.0;

  LabeledPerturbation() = default;
  LabeledPerturbation(Eigen::VectorXd z_in, double weight_in, double y_in);
};

// Posterior state of the surrogate: coefficient mean phi_hat (the feature
// importances), covariance shape V, residual scale s2, and the prior it was
// fitted under. Immutable once constructed.
class SurrogatePosterior {
 public:
  SurrogatePosterior(Eigen::VectorXd phi_hat, SpdMatrix v, double s2, PriorSpec prior, int n_obs);

  static SurrogatePosterior prior_only(int dim, const PriorSpec& prior);

  int dim() const { return static_cast<int>(phi_hat_.size()); }
  const Eigen::VectorXd& phi_hat() const { return phi_hat_; }
  const SpdMatrix& v() const { return v_; }
  double s2() const { return s2_; }
  double n0() const { return prior_.n0; }
  double sigma0_sq() const { return prior_.sigma0_sq; }
  double lambda() const { return prior_.lambda; }
  int n_obs() const { return n_obs_; }
  double nu() const { return prior_.n0 + n_obs_; }
  const PriorSpec& prior() const { return prior_; }

 private:
  Eigen::VectorXd phi_hat_;
  SpdMatrix v_;
  double s2_;
  PriorSpec prior_;
  int n_obs_;
};

// Dense refit of the weighted ridge posterior:
//   V       = (ZᵀWZ + λI)⁻¹
//   phi_hat = V ZᵀW y
//   s²      = (y − Z phi_hat)ᵀ W (y − Z phi_hat) + λ · phi_hatᵀ phi_hat
// `dim` is required so that an empty data set yields the prior-only state.
SurrogatePosterior fit_blr(const std::vector<LabeledPerturbation>& data, const PriorSpec& prior,
                           int dim);

// Variance of the Student-t posterior predictive at z:
//   ((zᵀVz + 1) · s²) · ν / (ν − 2),  requires ν > 2.
double predictive_variance(const SurrogatePosterior& post, const Eigen::VectorXd& z);

// Equal-tailed credible interval for one coefficient,
//   phi_hat[i] ± t_{ν,(1+level)/2} · sqrt((ν₁/ν) · V[i][i]),
// with ν = n0 + N and ν₁ = n0·σ0² + s².
std::pair<double, double> credible_interval(const SurrogatePosterior& post, int feature,
                                            double level);

// Mean credible-interval width across all coefficients.
double mean_credible_width(const SurrogatePosterior& post, double level);

}  // namespace eagle
