#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "eagle/spd_matrix.hpp"
#include "eagle/trace.hpp"

namespace eagle {

// Two sides of an inequality check, satisfied ⇔ lhs ≤ rhs + 1e-9.
struct BoundCheckResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
  double slack = 0.0;  // rhs − lhs
  int t = 0;
  int dim = 0;
  std::optional<double> delta;
  std::vector<double> lhs_series;  // running lhs per step, for curve plots
};

struct TheoryParams {
  double sigma = 0.0;          // response noise std
  double delta = 0.1;          // confidence parameter, in (0,1)
  double nu_acc = 0.5;         // target ℓ2 accuracy
  double kappa_hat = 0.0;      // estimated design-richness rate
  double phi_star_norm = 0.0;  // ‖φ★‖₂
  int dim = 1;                 // feature dimension entering β_δ

  void validate() const;
};

// Cumulative-information bound: Σ_s π(z_s)·z_sᵀV_{s−1}z_s ≤ 2d·log(1 + t/d).
// Recomputes the left side from the stored (z, π) sequence with fresh rank-1
// updates from V₀ = I. Requires a unit-prior trace (λ = 1) with ‖z‖₂ ≤ 1.
BoundCheckResult check_info_gain_bound(const RunTrace& trace, int dim);

// β_δ = σ·√(d + 2√(d·log(1/δ)) + 2·log(1/δ)).
double beta_delta(double sigma, int dim, double delta);

// Confidence-ellipsoid check at the final step of the trace:
//   ‖φ̂_t − φ★‖_{V_t⁻¹} ≤ β_δ + ‖φ★‖_{V_t⁻¹}.
// The estimator is the weighted ridge mean refit from the stored queries.
BoundCheckResult check_estimation_bound(const RunTrace& trace, const Eigen::VectorXd& phi_star,
                                        const TheoryParams& params);

// κ̂ = min over checkpoints t ∈ {stride, 2·stride, …} of λ_min(S_t)/t, where
// S_t = Σ_{s≤t} π(z_s)·z_s z_sᵀ.
double kappa_hat_from_trace(const RunTrace& trace, int checkpoint_stride = 50);

// ⌈(1/κ)·((β_δ + ‖φ★‖)²/ν² − 1)⌉, clamped at 0; nullopt when κ̂ ≤ 0
// (degenerate design, bound vacuous).
std::optional<long> sample_complexity_estimate(const TheoryParams& params);

// Differential entropy (nats) of a d-dimensional Student-t with dof ν and
// scale matrix Σ:
//   ½·log|Σ| + log[(νπ)^{d/2}·B(d/2, ν/2)/Γ(d/2)] + ((ν+d)/2)·(ψ((ν+d)/2) − ψ(ν/2)).
double student_t_entropy(double nu, int dim, const SpdMatrix& scale);
double student_t_entropy_unit_scale(double nu, int dim);

// Constants reconstructing the prior-minus-posterior entropy of the
// coefficient marginals:
//   log c2 = entropy of the prior  T_{n0}(0, σ0²·I_d),
//   log c1 = entropy of the posterior T_{n0+N}(φ̂, (ν₁/(n0+N))·V) minus ½log|V|,
// so that  H[prior] − H[posterior] = log c2 − log c1 − ½·log|V|.
std::pair<double, double> theorem3_constants(double n0, double sigma0_sq, int n_obs, double s2,
                                             int dim);

double entropy_difference_from_constants(double c1, double c2, double logdet_v);

}  // namespace eagle
