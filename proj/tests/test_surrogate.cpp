#include <doctest.h>

#include <initializer_list>
#include <stdexcept>

#include <cmath>
#include <random>

#include "eagle/rng.hpp"
#include "eagle/surrogate.hpp"

using namespace eagle;

namespace {

std::vector<LabeledPerturbation> make_random_data(int n, int d, RngStream& rng) {
  std::vector<LabeledPerturbation> data;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd z(d);
    for (int j = 0; j < d; ++j) z(j) = rng.gaussian();
    data.emplace_back(z, rng.uniform01(), rng.uniform01());
  }
  return data;
}

// Normal quantile by bisection on erf; used only as a reference value.
double normal_quantile(double p) {
  double lo = 0.0, hi = 16.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double cdf = 0.5 * (1.0 + std::erf(mid / std::sqrt(2.0)));
    (cdf < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("fit with no data returns the prior state") {
  const SurrogatePosterior post = fit_blr({}, PriorSpec{1.0, 1.0, 1.0}, 3);
  CHECK(post.phi_hat().norm() == 0.0);
  CHECK((post.v().entries() - Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);
  CHECK(post.s2() == 0.0);
  CHECK(post.n_obs() == 0);
  CHECK(post.nu() == 1.0);
}

TEST_CASE("fit on a single scalar point") {
  std::vector<LabeledPerturbation> data;
  data.emplace_back(Eigen::VectorXd::Ones(1), 1.0, 1.0);
  const SurrogatePosterior post = fit_blr(data, PriorSpec{1.0, 1.0, 1.0}, 1);
  CHECK(post.v().entries()(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(post.phi_hat()(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(post.s2() == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("fit matches an independent least-squares route") {
  RngStream rng(31);
  const int n = 50, d = 4;
  const double lambda = 1.7;
  const auto data = make_random_data(n, d, rng);
  const SurrogatePosterior post = fit_blr(data, PriorSpec{1.0, 1.0, lambda}, d);

  // Weighted ridge as an augmented least-squares problem solved by QR:
  // rows √wᵢ·zᵢ with targets √wᵢ·yᵢ, plus √λ·I with zero targets.
  Eigen::MatrixXd aug(n + d, d);
  Eigen::VectorXd target(n + d);
  for (int i = 0; i < n; ++i) {
    aug.row(i) = std::sqrt(data[i].weight) * data[i].z.transpose();
    target(i) = std::sqrt(data[i].weight) * data[i].y;
  }
  aug.bottomRows(d) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(d, d);
  target.tail(d).setZero();
  const Eigen::VectorXd phi_qr = aug.colPivHouseholderQr().solve(target);

  CHECK((post.phi_hat() - phi_qr).norm() < 1e-8);
}

TEST_CASE("fit rejects malformed input") {
  CHECK_THROWS_AS(fit_blr({}, PriorSpec{1.0, 1.0, 1.0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(LabeledPerturbation(Eigen::Vector2d(0.0, 1.0 / 0.0), 1.0, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(LabeledPerturbation(Eigen::Vector2d(0.0, 1.0), 1.0, std::nan("")),
                  std::invalid_argument);
}

TEST_CASE("weights clamp into the unit interval") {
  const LabeledPerturbation p(Eigen::Vector2d(1.0, 0.0), 3.5, 0.5);
  CHECK(p.weight == 1.0);
  const LabeledPerturbation q(Eigen::Vector2d(1.0, 0.0), -0.2, 0.5);
  CHECK(q.weight == 0.0);
}

TEST_CASE("predictive variance closed-form cases") {
  {
    const SurrogatePosterior post(Eigen::VectorXd::Zero(2), SpdMatrix::identity(2), 1.0,
                                  PriorSpec{2.0, 1.0, 1.0}, 8);  // nu = 10
    CHECK(predictive_variance(post, Eigen::Vector2d(0.0, 0.0)) ==
          doctest::Approx(1.25).epsilon(1e-14));
  }
  {
    const SurrogatePosterior post(Eigen::VectorXd::Zero(2), SpdMatrix::identity(2), 2.0,
                                  PriorSpec{1.0, 1.0, 1.0}, 3);  // nu = 4
    CHECK(predictive_variance(post, Eigen::Vector2d(1.0, 0.0)) ==
          doctest::Approx(8.0).epsilon(1e-14));
  }
  {
    const SurrogatePosterior post(Eigen::VectorXd::Zero(2), SpdMatrix::identity(2), 1.0,
                                  PriorSpec{1.0, 1.0, 1.0}, 1);  // nu = 2
    CHECK_THROWS_AS(predictive_variance(post, Eigen::Vector2d(1.0, 0.0)), std::domain_error);
  }
}

TEST_CASE("predictive variance matches monte-carlo draws from the predictive") {
  RngStream rng(37);
  const int d = 3;
  const auto data = make_random_data(40, d, rng);
  const PriorSpec prior{9.0, 1.0, 1.0};
  const SurrogatePosterior post = fit_blr(data, prior, d);  // nu = 49
  Eigen::VectorXd z(d);
  for (int j = 0; j < d; ++j) z(j) = rng.gaussian();

  const double nu = post.nu();
  const double loc = post.phi_hat().dot(z);
  const double scale = std::sqrt((post.v().quad_form(z) + 1.0) * post.s2());

  std::mt19937_64 gen(1234);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::chi_squared_distribution<double> chi2(nu);
  const int n_draws = 1000000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n_draws; ++i) {
    const double draw = loc + scale * normal(gen) / std::sqrt(chi2(gen) / nu);
    sum += draw;
    sum_sq += draw * draw;
  }
  const double mc_var = sum_sq / n_draws - (sum / n_draws) * (sum / n_draws);
  CHECK(predictive_variance(post, z) == doctest::Approx(mc_var).epsilon(0.02));
}

TEST_CASE("credible interval degenerates as the level vanishes") {
  const SurrogatePosterior post(Eigen::VectorXd::Ones(2), SpdMatrix::identity(2), 1.0,
                                PriorSpec{3.0, 1.0, 1.0}, 5);
  const auto [lo, hi] = credible_interval(post, 0, 1e-12);
  CHECK(hi - lo < 1e-10);
  CHECK(0.5 * (lo + hi) == doctest::Approx(1.0));
  CHECK_THROWS_AS(credible_interval(post, 5, 0.9), std::invalid_argument);
}

TEST_CASE("credible interval reaches the gaussian limit for large dof") {
  // nu1/nu · V_ii = 1 with sigma0_sq = 1, s2 = 0 and V = I.
  const double n0 = 1e4;
  const SurrogatePosterior post(Eigen::VectorXd::Zero(2), SpdMatrix::identity(2), 0.0,
                                PriorSpec{n0, 1.0, 1.0}, 0);
  const auto [lo, hi] = credible_interval(post, 0, 0.90);
  const double half = (hi - lo) / 2.0;
  CHECK(half == doctest::Approx(normal_quantile(0.95)).epsilon(1e-3));
  CHECK(half == doctest::Approx(1.6449).epsilon(1e-3));
}

TEST_CASE("credible interval at nu = 3 matches the t quantile") {
  const SurrogatePosterior post(Eigen::VectorXd::Zero(2), SpdMatrix::identity(2), 0.0,
                                PriorSpec{3.0, 1.0, 1.0}, 0);
  const auto [lo, hi] = credible_interval(post, 1, 0.90);
  CHECK((hi - lo) / 2.0 == doctest::Approx(2.3534).epsilon(1e-3));
}

TEST_CASE("uniform weight rescaling leaves the mean unchanged") {
  RngStream rng(41);
  const int d = 3;
  const auto data = make_random_data(30, d, rng);
  const double lambda = 2.0;
  const SurrogatePosterior base = fit_blr(data, PriorSpec{1.0, 1.0, lambda}, d);
  for (double c : {0.25, 0.6, 1.0}) {
    auto scaled = data;
    for (auto& p : scaled) p.weight *= c;
    const SurrogatePosterior post = fit_blr(scaled, PriorSpec{1.0, 1.0, c * lambda}, d);
    CHECK((post.phi_hat() - base.phi_hat()).norm() < 1e-10);
    CHECK(post.s2() == doctest::Approx(c * base.s2()).epsilon(1e-10));
  }
}

TEST_CASE("posterior covariance contracts as data accrues") {
  RngStream rng(43);
  const int d = 4;
  const auto data = make_random_data(60, d, rng);
  const PriorSpec prior{1.0, 1.0, 1.0};
  const SurrogatePosterior small = fit_blr(std::vector<LabeledPerturbation>(data.begin(), data.begin() + 20), prior, d);
  const SurrogatePosterior large = fit_blr(data, prior, d);
  for (int probe = 0; probe < 50; ++probe) {
    Eigen::VectorXd z(d);
    for (int j = 0; j < d; ++j) z(j) = rng.gaussian();
    CHECK(large.v().quad_form(z) <= small.v().quad_form(z) + 1e-12);
  }
}

TEST_CASE("credible width shrinks with sample size on linear data") {
  const int d = 3;
  const Eigen::VectorXd phi_star = Eigen::Vector3d(1.0, -0.5, 0.25);
  const PriorSpec prior{1.0, 1.0, 1.0};
  double prev_width = std::numeric_limits<double>::infinity();
  for (int n : {10, 40, 160}) {
    double mean_width = 0.0;
    for (int seed = 0; seed < 20; ++seed) {
      RngStream rng(100 + seed);
      std::vector<LabeledPerturbation> data;
      for (int i = 0; i < n; ++i) {
        Eigen::VectorXd z(d);
        for (int j = 0; j < d; ++j) z(j) = rng.gaussian();
        data.emplace_back(z, 1.0, z.dot(phi_star) + 0.1 * rng.gaussian());
      }
      mean_width += mean_credible_width(fit_blr(data, prior, d), 0.90);
    }
    mean_width /= 20.0;
    CHECK(mean_width < prev_width);
    prev_width = mean_width;
  }
}
