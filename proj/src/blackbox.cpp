#include "eagle/blackbox.hpp"

#include <cmath>
#include <stdexcept>

namespace eagle {

SyntheticLinearModel::SyntheticLinearModel(Eigen::VectorXd phi_star, double sigma,
                                           std::uint64_t seed)
    : phi_star_(std::move(phi_star)), sigma_(sigma), noise_(seed) {
  if (phi_star_.size() == 0) throw std::invalid_argument("SyntheticLinearModel: empty phi_star");
  if (!(sigma_ >= 0.0)) throw std::invalid_argument("SyntheticLinearModel: sigma must be nonnegative");
}

double SyntheticLinearModel::do_predict(const Eigen::VectorXd& z) {
  if (z.size() != phi_star_.size()) {
    throw std::invalid_argument("SyntheticLinearModel: dimension mismatch");
  }
  double eps = 0.0;
  if (sigma_ > 0.0) {
    std::lock_guard<std::mutex> lock(mutex_);
    eps = sigma_ * noise_.gaussian();
  }
  return z.dot(phi_star_) + eps;
}

namespace {

// Distance from a point to a half-circle arc with center c, radius 1.
// `upper` selects the arc with nonnegative (true) or nonpositive (false)
// y-offset from the center.
double arc_distance(double px, double py, double cx, double cy, bool upper) {
  const double dx = px - cx;
  const double dy = py - cy;
  const bool in_range = upper ? (dy >= 0.0) : (dy <= 0.0);
  if (in_range) {
    return std::fabs(std::hypot(dx, dy) - 1.0);
  }
  // Nearest arc point is one of the two endpoints on the x-axis of the circle.
  const double d_left = std::hypot(dx + 1.0, dy);
  const double d_right = std::hypot(dx - 1.0, dy);
  return std::min(d_left, d_right);
}

}  // namespace

MoonsModel::MoonsModel(double sharpness, int ambient_dim)
    : sharpness_(sharpness), ambient_dim_(ambient_dim) {
  if (!(sharpness_ > 0.0)) throw std::invalid_argument("MoonsModel: sharpness must be positive");
  if (ambient_dim_ < 2) throw std::invalid_argument("MoonsModel: ambient dimension must be >= 2");
}

double MoonsModel::signed_distance(double x, double y) const {
  // Crescent A: upper half of the unit circle at the origin.
  // Crescent B: lower half of the unit circle at (1, 0.5).
  const double da = arc_distance(x, y, 0.0, 0.0, /*upper=*/true);
  const double db = arc_distance(x, y, 1.0, 0.5, /*upper=*/false);
  return da - db;
}

double MoonsModel::do_predict(const Eigen::VectorXd& z) {
  if (z.size() != ambient_dim_) throw std::invalid_argument("MoonsModel: dimension mismatch");
  const double s = signed_distance(z(0), z(1));
  return 1.0 / (1.0 + std::exp(-sharpness_ * s));
}

}  // namespace eagle
