#include <doctest.h>

#include <initializer_list>
#include <stdexcept>

#include <cmath>

#include "eagle/sampling.hpp"

using namespace eagle;

TEST_CASE("kernel weight closed-form values") {
  const LocalityKernel k(Eigen::Vector2d(1.0, -2.0), 1.5);
  CHECK(k.weight(Eigen::Vector2d(1.0, -2.0)) == 1.0);
  CHECK(k.weight(Eigen::Vector2d(1.0 + 1.5, -2.0)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  // d = 4 with the default width 0.75·√4 = 1.5 and distance 3.
  const LocalityKernel k4(Eigen::VectorXd::Zero(4), LocalityKernel::default_width(4));
  Eigen::VectorXd z = Eigen::VectorXd::Zero(4);
  z(0) = 3.0;
  CHECK(k4.weight(z) == doctest::Approx(std::exp(-4.0)).epsilon(1e-12));

  CHECK_THROWS_AS(k.weight(Eigen::Vector3d(0, 0, 0)), std::invalid_argument);
  CHECK_THROWS_AS(LocalityKernel(Eigen::Vector2d(0, 0), 0.0), std::invalid_argument);
}

TEST_CASE("kernel weight strictly decreases with distance") {
  const LocalityKernel k(Eigen::Vector3d(0.5, 0.0, -1.0), 2.0);
  double prev = 2.0;
  for (double r = 0.0; r < 5.0; r += 0.25) {
    Eigen::VectorXd z = k.x0();
    z(1) += r;
    const double w = k.weight(z);
    CHECK(w < prev);
    CHECK(w > 0.0);
    CHECK(w <= 1.0);
    prev = w;
  }
}

TEST_CASE("pools are reproducible from the seed") {
  const LocalityKernel k(Eigen::Vector2d(0.3, 0.7), 1.0);
  PoolConfig cfg;
  cfg.pool_size = 64;
  RngStream a(99), b(99);
  const auto pa = draw_pool(k, cfg, a);
  const auto pb = draw_pool(k, cfg, b);
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i] == pb[i]);  // bitwise
  }
}

TEST_CASE("zero perturbation scale pins candidates to the instance") {
  const LocalityKernel k(Eigen::Vector2d(2.0, -1.0), 1.0);
  PoolConfig cfg;
  cfg.pool_size = 16;
  cfg.perturb_scale = Eigen::VectorXd::Zero(2);
  RngStream rng(5);
  for (const auto& z : draw_pool(k, cfg, rng)) {
    CHECK((z - k.x0()).norm() == 0.0);
  }
}

TEST_CASE("gaussian pool moments") {
  const int n = 100000;
  const LocalityKernel k(Eigen::Vector2d(0.5, -0.25), 1.0);
  PoolConfig cfg;
  cfg.pool_size = n;
  RngStream rng(123);
  const auto pool = draw_pool(k, cfg, rng);

  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& z : pool) mean += z;
  mean /= n;
  Eigen::Vector2d var = Eigen::Vector2d::Zero();
  for (const auto& z : pool) var += (z - mean).cwiseAbs2();
  var /= n - 1;

  for (int j = 0; j < 2; ++j) {
    CHECK(std::fabs(mean(j) - k.x0()(j)) < 0.02);
    CHECK(var(j) == doctest::Approx(1.0).epsilon(0.03));
  }
}

TEST_CASE("kernel-proportional pool concentrates and has the kernel's variance") {
  PoolConfig cfg;
  cfg.pool_size = 100000;

  {
    const LocalityKernel k(Eigen::Vector2d(1.0, 1.0), 1e-6);
    PoolConfig small = cfg;
    small.pool_size = 1000;
    RngStream rng(7);
    double max_dev = 0.0;
    for (const auto& z : glime_pool(k, small, rng)) {
      max_dev = std::max(max_dev, (z - k.x0()).norm());
    }
    CHECK(max_dev < 1e-5);
  }

  const double width = 1.3;
  const LocalityKernel k(Eigen::Vector2d(-0.4, 0.9), width);
  RngStream rng(11);
  const auto pool = glime_pool(k, cfg, rng);
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& z : pool) mean += z;
  mean /= cfg.pool_size;
  Eigen::Vector2d var = Eigen::Vector2d::Zero();
  for (const auto& z : pool) var += (z - mean).cwiseAbs2();
  var /= cfg.pool_size - 1;

  for (int j = 0; j < 2; ++j) {
    CHECK(std::fabs(mean(j) - k.x0()(j)) < 0.02);
    CHECK(var(j) == doctest::Approx(width * width / 2.0).epsilon(0.03));
  }
}

TEST_CASE("pool config validation") {
  PoolConfig cfg;
  cfg.seed_count = 600;
  cfg.budget = 500;
  CHECK_THROWS_AS(cfg.validate(3), std::invalid_argument);

  PoolConfig cfg2;
  cfg2.batch_size = 2000;
  CHECK_THROWS_AS(cfg2.validate(3), std::invalid_argument);

  PoolConfig cfg3;
  cfg3.perturb_scale = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(cfg3.validate(3), std::invalid_argument);
  CHECK_NOTHROW(cfg3.validate(2));
}
