#pragma once

#include <Eigen/Dense>

namespace eagle {

// Symmetric positive definite matrix with its lower Cholesky factor kept
// alongside the entries. Immutable after construction; all operations on
// it are pure functions, so instances can be shared across threads.
//
// Construction enforces:
//   - symmetry to 1e-12 absolute per entry,
//   - strictly positive Cholesky pivots,
// and the factor reconstructs the entries to ~1e-10 relative Frobenius.
class SpdMatrix {
 public:
  static SpdMatrix identity(int dim);
  static SpdMatrix scaled_identity(int dim, double value);

  // Validates symmetry and positive definiteness; throws std::invalid_argument
  // on asymmetric input and std::runtime_error on a failed factorization.
  static SpdMatrix from_matrix(const Eigen::MatrixXd& m);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  const Eigen::MatrixXd& cholesky_lower() const { return chol_; }

  double log_det() const;
  double trace() const { return entries_.trace(); }

  // zᵀ M z
  double quad_form(const Eigen::VectorXd& z) const;

  // M⁻¹ via the cached factor, symmetrized.
  Eigen::MatrixXd inverse() const;

 private:
  SpdMatrix(Eigen::MatrixXd entries, Eigen::MatrixXd chol)
      : entries_(std::move(entries)), chol_(std::move(chol)) {}

  Eigen::MatrixXd entries_;
  Eigen::MatrixXd chol_;
};

// Sherman-Morrison downdate of a covariance: returns the inverse of
// (V⁻¹ + w z zᵀ) without forming V⁻¹,
//   V' = V − (w · V z zᵀ V) / (1 + w · zᵀ V z).
// Requires w ≥ 0 and dim(z) == dim(V). The result is symmetrized and
// re-factorized, so it satisfies the SpdMatrix invariants.
SpdMatrix rank1_downdate_covariance(const SpdMatrix& v, const Eigen::VectorXd& z, double w);

// log|V| − log|V'| for the update above, via the matrix determinant lemma:
// log(1 + w zᵀVz). Nonnegative for w ≥ 0.
double logdet_ratio_after_update(const SpdMatrix& v, const Eigen::VectorXd& z, double w);

// Smallest eigenvalue of a symmetric (positive semidefinite) matrix.
// Throws std::invalid_argument if the input is not symmetric.
double min_eigenvalue(const Eigen::MatrixXd& m);
double min_eigenvalue(const SpdMatrix& m);

}  // namespace eagle
