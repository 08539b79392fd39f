#include "eagle/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "eagle/special_functions.hpp"

namespace eagle {

void PriorSpec::validate() const {
  if (!(n0 > 0.0) || !std::isfinite(n0)) {
    throw std::invalid_argument("PriorSpec: n0 must be positive and finite");
  }
  if (!(sigma0_sq > 0.0) || !std::isfinite(sigma0_sq)) {
    throw std::invalid_argument("PriorSpec: sigma0_sq must be positive and finite");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("PriorSpec: lambda must be positive and finite");
  }
}

LabeledPerturbation::LabeledPerturbation(Eigen::VectorXd z_in, double weight_in, double y_in)
    : z(std::move(z_in)), weight(weight_in), y(y_in) {
  if (!z.allFinite()) throw std::invalid_argument("LabeledPerturbation: non-finite perturbation");
  if (!std::isfinite(weight)) throw std::invalid_argument("LabeledPerturbation: non-finite weight");
  if (!std::isfinite(y)) throw std::invalid_argument("LabeledPerturbation: non-finite response");
  weight = std::clamp(weight, 0.0, 1.0);
}

SurrogatePosterior::SurrogatePosterior(Eigen::VectorXd phi_hat, SpdMatrix v, double s2,
                                       PriorSpec prior, int n_obs)
    : phi_hat_(std::move(phi_hat)), v_(std::move(v)), s2_(s2), prior_(prior), n_obs_(n_obs) {
  prior_.validate();
  if (phi_hat_.size() != v_.dim()) {
    throw std::invalid_argument("SurrogatePosterior: mean/covariance dimension mismatch");
  }
  if (!(s2_ >= 0.0)) throw std::invalid_argument("SurrogatePosterior: s2 must be nonnegative");
  if (n_obs_ < 0) throw std::invalid_argument("SurrogatePosterior: n_obs must be nonnegative");
}

SurrogatePosterior SurrogatePosterior::prior_only(int dim, const PriorSpec& prior) {
  prior.validate();
  if (dim <= 0) throw std::invalid_argument("SurrogatePosterior: dimension must be positive");
  return SurrogatePosterior(Eigen::VectorXd::Zero(dim),
                            SpdMatrix::scaled_identity(dim, 1.0 / prior.lambda), 0.0, prior, 0);
}

SurrogatePosterior fit_blr(const std::vector<LabeledPerturbation>& data, const PriorSpec& prior,
                           int dim) {
  prior.validate();
  if (dim <= 0) throw std::invalid_argument("fit_blr: dimension must be positive");
  if (data.empty()) return SurrogatePosterior::prior_only(dim, prior);

  Eigen::MatrixXd precision = prior.lambda * Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  for (const auto& p : data) {
    if (p.z.size() != dim) throw std::invalid_argument("fit_blr: perturbation dimension mismatch");
    precision.noalias() += p.weight * (p.z * p.z.transpose());
    rhs.noalias() += p.weight * p.y * p.z;
  }
  precision = ((precision + precision.transpose()) / 2.0).eval();

  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("fit_blr: posterior precision is not positive definite");
  }
  Eigen::VectorXd phi = llt.solve(rhs);
  Eigen::MatrixXd v = llt.solve(Eigen::MatrixXd::Identity(dim, dim));
  v = ((v + v.transpose()) / 2.0).eval();

  double s2 = prior.lambda * phi.squaredNorm();
  for (const auto& p : data) {
    const double r = p.y - p.z.dot(phi);
    s2 += p.weight * r * r;
  }

  return SurrogatePosterior(std::move(phi), SpdMatrix::from_matrix(v), s2, prior,
                            static_cast<int>(data.size()));
}

double predictive_variance(const SurrogatePosterior& post, const Eigen::VectorXd& z) {
  const double nu = post.nu();
  if (!(nu > 2.0)) {
    throw std::domain_error("predictive_variance: nu <= 2, predictive variance undefined");
  }
  return (post.v().quad_form(z) + 1.0) * post.s2() * nu / (nu - 2.0);
}

std::pair<double, double> credible_interval(const SurrogatePosterior& post, int feature,
                                            double level) {
  if (feature < 0 || feature >= post.dim()) {
    throw std::invalid_argument("credible_interval: feature index out of range");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("credible_interval: level must lie in (0,1)");
  }
  const double nu = post.nu();
  const double nu1 = post.n0() * post.sigma0_sq() + post.s2();
  const double scale = std::sqrt(nu1 / nu * post.v().entries()(feature, feature));
  const double half = student_t_quantile(nu, (1.0 + level) / 2.0) * scale;
  const double center = post.phi_hat()(feature);
  return {center - half, center + half};
}

double mean_credible_width(const SurrogatePosterior& post, double level) {
  double acc = 0.0;
  for (int i = 0; i < post.dim(); ++i) {
    const auto [lo, hi] = credible_interval(post, i, level);
    acc += hi - lo;
  }
  return acc / post.dim();
}

}  // namespace eagle
