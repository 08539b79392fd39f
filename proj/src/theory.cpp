#include "eagle/theory.hpp"

#include <cmath>
#include <stdexcept>

#include "eagle/special_functions.hpp"

namespace eagle {

namespace {

constexpr double kBoundTol = 1e-9;

BoundCheckResult make_result(double lhs, double rhs, int t, int dim, std::optional<double> delta) {
  BoundCheckResult r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.satisfied = lhs <= rhs + kBoundTol;
  r.slack = rhs - lhs;
  r.t = t;
  r.dim = dim;
  r.delta = delta;
  return r;
}

// S_t = Σ π z zᵀ accumulated over the trace's steps.
Eigen::MatrixXd weighted_info_matrix(const RunTrace& trace, int upto) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(trace.dim, trace.dim);
  for (int i = 0; i < upto; ++i) {
    const auto& rec = trace.steps[i];
    s.noalias() += rec.weight * (rec.z * rec.z.transpose());
  }
  return ((s + s.transpose()) / 2.0).eval();
}

}  // namespace

void TheoryParams::validate() const {
  if (!(sigma >= 0.0)) throw std::invalid_argument("TheoryParams: sigma must be nonnegative");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("TheoryParams: delta must lie in (0,1)");
  if (!(nu_acc > 0.0)) throw std::invalid_argument("TheoryParams: nu_acc must be positive");
  if (dim <= 0) throw std::invalid_argument("TheoryParams: dimension must be positive");
}

BoundCheckResult check_info_gain_bound(const RunTrace& trace, int dim) {
  if (trace.dim != dim) throw std::invalid_argument("check_info_gain_bound: dimension mismatch");
  if (trace.prior.lambda != 1.0) {
    throw std::invalid_argument("check_info_gain_bound: trace requires a unit prior (lambda = 1)");
  }

  SpdMatrix v = SpdMatrix::identity(dim);
  double lhs = 0.0;
  BoundCheckResult partial;
  partial.lhs_series.reserve(trace.steps.size());
  for (const auto& rec : trace.steps) {
    if (rec.z.norm() > 1.0 + 1e-12) {
      throw std::invalid_argument("check_info_gain_bound: trace violates ‖z‖ ≤ 1 at t=" +
                                  std::to_string(rec.t));
    }
    if (rec.weight < 0.0 || rec.weight > 1.0) {
      throw std::invalid_argument("check_info_gain_bound: trace weight outside [0,1] at t=" +
                                  std::to_string(rec.t));
    }
    lhs += rec.weight * v.quad_form(rec.z);
    partial.lhs_series.push_back(lhs);
    v = rank1_downdate_covariance(v, rec.z, rec.weight);
  }

  const int t = static_cast<int>(trace.steps.size());
  const double rhs = 2.0 * dim * std::log1p(static_cast<double>(t) / dim);
  BoundCheckResult result = make_result(lhs, rhs, t, dim, std::nullopt);
  result.lhs_series = std::move(partial.lhs_series);
  return result;
}

double beta_delta(double sigma, int dim, double delta) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("beta_delta: sigma must be nonnegative");
  if (dim <= 0) throw std::invalid_argument("beta_delta: dimension must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("beta_delta: delta must lie in (0,1)");
  const double log_inv = std::log(1.0 / delta);
  return sigma * std::sqrt(dim + 2.0 * std::sqrt(dim * log_inv) + 2.0 * log_inv);
}

BoundCheckResult check_estimation_bound(const RunTrace& trace, const Eigen::VectorXd& phi_star,
                                        const TheoryParams& params) {
  params.validate();
  if (phi_star.size() != trace.dim) {
    throw std::invalid_argument("check_estimation_bound: ground truth dimension mismatch");
  }
  if (trace.steps.empty()) throw std::invalid_argument("check_estimation_bound: empty trace");
  if (trace.prior.lambda != 1.0) {
    throw std::invalid_argument("check_estimation_bound: trace requires a unit prior (lambda = 1)");
  }

  const int t = static_cast<int>(trace.steps.size());
  const int d = trace.dim;

  // Weighted ridge estimate refit from the stored queries (same estimator
  // the run itself uses).
  Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(d, d) + weighted_info_matrix(trace, t);
  Eigen::VectorXd rhs_vec = Eigen::VectorXd::Zero(d);
  for (const auto& rec : trace.steps) rhs_vec.noalias() += rec.weight * rec.y * rec.z;
  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("check_estimation_bound: precision factorization failed");
  }
  const Eigen::VectorXd phi_hat = llt.solve(rhs_vec);

  const Eigen::VectorXd err = phi_hat - phi_star;
  const double lhs = std::sqrt(err.dot(precision * err));
  const double rhs =
      beta_delta(params.sigma, d, params.delta) + std::sqrt(phi_star.dot(precision * phi_star));
  return make_result(lhs, rhs, t, d, params.delta);
}

double kappa_hat_from_trace(const RunTrace& trace, int checkpoint_stride) {
  if (checkpoint_stride <= 0) {
    throw std::invalid_argument("kappa_hat_from_trace: stride must be positive");
  }
  const int t_max = static_cast<int>(trace.steps.size());
  if (t_max == 0) throw std::invalid_argument("kappa_hat_from_trace: empty trace");

  std::vector<int> checkpoints;
  for (int t = checkpoint_stride; t <= t_max; t += checkpoint_stride) checkpoints.push_back(t);
  if (checkpoints.empty()) checkpoints.push_back(t_max);

  double kappa = std::numeric_limits<double>::infinity();
  for (int t : checkpoints) {
    const double lam = min_eigenvalue(weighted_info_matrix(trace, t));
    kappa = std::min(kappa, lam / t);
  }
  return kappa;
}

std::optional<long> sample_complexity_estimate(const TheoryParams& params) {
  params.validate();
  if (!(params.kappa_hat > 0.0)) return std::nullopt;
  const double top = beta_delta(params.sigma, params.dim, params.delta) + params.phi_star_norm;
  const double bound = (top * top / (params.nu_acc * params.nu_acc) - 1.0) / params.kappa_hat;
  if (bound <= 0.0) return 0;
  return static_cast<long>(std::ceil(bound));
}

double student_t_entropy_unit_scale(double nu, int dim) {
  if (!(nu > 0.0)) throw std::domain_error("student_t_entropy: nu must be positive");
  if (dim <= 0) throw std::domain_error("student_t_entropy: dimension must be positive");
  const double half_d = dim / 2.0;
  const double half_nu = nu / 2.0;
  const double log_const =
      half_d * std::log(nu * M_PI) + log_beta(half_d, half_nu) - log_gamma(half_d);
  const double psi_term = (nu + dim) / 2.0 * (digamma((nu + dim) / 2.0) - digamma(half_nu));
  return log_const + psi_term;
}

double student_t_entropy(double nu, int dim, const SpdMatrix& scale) {
  if (scale.dim() != dim) throw std::invalid_argument("student_t_entropy: scale dimension mismatch");
  return 0.5 * scale.log_det() + student_t_entropy_unit_scale(nu, dim);
}

std::pair<double, double> theorem3_constants(double n0, double sigma0_sq, int n_obs, double s2,
                                             int dim) {
  if (!(n0 > 0.0) || !(sigma0_sq > 0.0)) {
    throw std::domain_error("theorem3_constants: prior parameters must be positive");
  }
  if (n_obs < 0 || !(s2 >= 0.0)) {
    throw std::domain_error("theorem3_constants: n_obs and s2 must be nonnegative");
  }
  const double nu_post = n0 + n_obs;
  const double nu1 = n0 * sigma0_sq + s2;
  const double log_c1 =
      dim / 2.0 * std::log(nu1 / nu_post) + student_t_entropy_unit_scale(nu_post, dim);
  const double log_c2 = dim / 2.0 * std::log(sigma0_sq) + student_t_entropy_unit_scale(n0, dim);
  return {std::exp(log_c1), std::exp(log_c2)};
}

double entropy_difference_from_constants(double c1, double c2, double logdet_v) {
  return std::log(c2) - std::log(c1) - 0.5 * logdet_v;
}

}  // namespace eagle
