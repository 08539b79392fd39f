#include "eagle/spd_matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace eagle {

namespace {

constexpr double kSymmetryTol = 1e-12;   // absolute, per entry
constexpr double kDenominatorTol = 1e-14;

void check_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("SpdMatrix: matrix must be square");
  }
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol) {
    throw std::invalid_argument("SpdMatrix: matrix is not symmetric (max |M - Mt| = " +
                                std::to_string(asym) + ")");
  }
}

}  // namespace

SpdMatrix SpdMatrix::identity(int dim) { return scaled_identity(dim, 1.0); }

SpdMatrix SpdMatrix::scaled_identity(int dim, double value) {
  if (dim <= 0) throw std::invalid_argument("SpdMatrix: dimension must be positive");
  if (!(value > 0.0)) throw std::invalid_argument("SpdMatrix: diagonal value must be positive");
  Eigen::MatrixXd m = value * Eigen::MatrixXd::Identity(dim, dim);
  Eigen::MatrixXd chol = std::sqrt(value) * Eigen::MatrixXd::Identity(dim, dim);
  return SpdMatrix(std::move(m), std::move(chol));
}

SpdMatrix SpdMatrix::from_matrix(const Eigen::MatrixXd& m) {
  check_symmetric(m);
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("SpdMatrix: Cholesky factorization failed (matrix not positive definite)");
  }
  Eigen::MatrixXd chol = llt.matrixL();
  for (int i = 0; i < chol.rows(); ++i) {
    if (!(chol(i, i) > 0.0)) {
      throw std::runtime_error("SpdMatrix: nonpositive Cholesky pivot");
    }
  }
  return SpdMatrix(m, std::move(chol));
}

double SpdMatrix::log_det() const {
  double acc = 0.0;
  for (int i = 0; i < chol_.rows(); ++i) acc += std::log(chol_(i, i));
  return 2.0 * acc;
}

double SpdMatrix::quad_form(const Eigen::VectorXd& z) const {
  if (z.size() != entries_.rows()) {
    throw std::invalid_argument("SpdMatrix::quad_form: dimension mismatch");
  }
  return z.dot(entries_ * z);
}

Eigen::MatrixXd SpdMatrix::inverse() const {
  const int d = dim();
  Eigen::MatrixXd inv = chol_.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(d, d));
  inv = chol_.transpose().triangularView<Eigen::Upper>().solve(inv);
  return ((inv + inv.transpose()) / 2.0).eval();
}

SpdMatrix rank1_downdate_covariance(const SpdMatrix& v, const Eigen::VectorXd& z, double w) {
  if (z.size() != v.dim()) {
    throw std::invalid_argument("rank1_downdate_covariance: dimension mismatch");
  }
  if (!(w >= 0.0)) {
    throw std::invalid_argument("rank1_downdate_covariance: weight must be nonnegative");
  }
  const Eigen::VectorXd u = v.entries() * z;
  const double denom = 1.0 + w * z.dot(u);
  if (denom <= kDenominatorTol) {
    throw std::runtime_error("rank1_downdate_covariance: denominator collapsed; covariance corrupted");
  }
  Eigen::MatrixXd next = v.entries() - (w / denom) * (u * u.transpose());
  next = ((next + next.transpose()) / 2.0).eval();
  return SpdMatrix::from_matrix(next);
}

double logdet_ratio_after_update(const SpdMatrix& v, const Eigen::VectorXd& z, double w) {
  if (z.size() != v.dim()) {
    throw std::invalid_argument("logdet_ratio_after_update: dimension mismatch");
  }
  if (!(w >= 0.0)) {
    throw std::invalid_argument("logdet_ratio_after_update: weight must be nonnegative");
  }
  const double q = v.quad_form(z);
  const double denom = 1.0 + w * q;
  if (denom <= kDenominatorTol) {
    throw std::runtime_error("logdet_ratio_after_update: denominator collapsed; covariance corrupted");
  }
  return std::log1p(w * q);
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  check_symmetric(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("min_eigenvalue: eigensolver failed");
  }
  return solver.eigenvalues()(0);
}

double min_eigenvalue(const SpdMatrix& m) { return min_eigenvalue(m.entries()); }

}  // namespace eagle
