#include <doctest.h>

#include <initializer_list>
#include <stdexcept>

#include <cmath>

#include "eagle/special_functions.hpp"

using namespace eagle;

namespace {

constexpr double kEulerGamma = 0.57721566490153286;

// Simpson quadrature of f over [a, b].
template <typename F>
double simpson(F f, double a, double b, int intervals) {
  const double h = (b - a) / intervals;
  double acc = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

double t_pdf(double nu, double x) {
  return std::exp(log_gamma((nu + 1.0) / 2.0) - log_gamma(nu / 2.0)) / std::sqrt(nu * M_PI) *
         std::pow(1.0 + x * x / nu, -(nu + 1.0) / 2.0);
}

// Quantile by bisection on the numerically integrated density; no reuse of
// the library's CDF path.
double t_quantile_by_integration(double nu, double p) {
  const auto cdf = [&](double t) {
    // F(t) = ½ + ∫₀ᵗ pdf, integrated with the x = tan(u) substitution.
    const double upper = std::atan(t);
    return 0.5 + simpson(
                     [&](double u) {
                       const double x = std::tan(u);
                       const double c = std::cos(u);
                       return t_pdf(nu, x) / (c * c);
                     },
                     0.0, upper, 4000);
  };
  double lo = 0.0, hi = 64.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("digamma against classic values and the recurrence") {
  CHECK(digamma(1.0) == doctest::Approx(-kEulerGamma).epsilon(1e-12));
  CHECK(digamma(0.5) == doctest::Approx(-kEulerGamma - 2.0 * std::log(2.0)).epsilon(1e-12));
  for (double x : {0.3, 1.7, 4.2, 9.5, 33.0}) {
    CHECK(digamma(x + 1.0) == doctest::Approx(digamma(x) + 1.0 / x).epsilon(1e-12));
  }
  CHECK_THROWS_AS(digamma(0.0), std::domain_error);
}

TEST_CASE("log beta against numeric integration") {
  for (auto [a, b] : {std::pair{2.5, 1.5}, {0.7, 3.0}, {4.0, 4.0}}) {
    const double integral = simpson(
        [a = a, b = b](double t) {
          if (t <= 0.0 || t >= 1.0) return 0.0;
          return std::pow(t, a - 1.0) * std::pow(1.0 - t, b - 1.0);
        },
        1e-9, 1.0 - 1e-9, 200000);
    CHECK(std::exp(log_beta(a, b)) == doctest::Approx(integral).epsilon(1e-6));
  }
}

TEST_CASE("incomplete beta basics") {
  for (double x : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    CHECK(incomplete_beta(1.0, 1.0, x) == doctest::Approx(x).epsilon(1e-12));
  }
  for (double x : {0.1, 0.4, 0.8}) {
    CHECK(incomplete_beta(2.5, 1.5, x) + incomplete_beta(1.5, 2.5, 1.0 - x) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  const double numeric =
      simpson([](double t) { return std::pow(t, 1.5) * std::pow(1.0 - t, 0.5); }, 0.0, 0.3,
              200000) /
      std::exp(log_beta(2.5, 1.5));
  CHECK(incomplete_beta(2.5, 1.5, 0.3) == doctest::Approx(numeric).epsilon(1e-8));
}

TEST_CASE("student t cdf: cauchy closed form and symmetry") {
  for (double t : {-3.0, -0.5, 0.0, 0.7, 4.0}) {
    CHECK(student_t_cdf(1.0, t) == doctest::Approx(0.5 + std::atan(t) / M_PI).epsilon(1e-12));
  }
  for (double t : {0.3, 1.2, 2.5}) {
    CHECK(student_t_cdf(7.0, -t) == doctest::Approx(1.0 - student_t_cdf(7.0, t)).epsilon(1e-12));
  }
}

TEST_CASE("student t quantile inverts the cdf") {
  for (double nu : {1.0, 3.0, 10.0, 100.0}) {
    for (double p : {0.05, 0.3, 0.5, 0.8, 0.95, 0.995}) {
      CHECK(student_t_cdf(nu, student_t_quantile(nu, p)) == doctest::Approx(p).epsilon(1e-10));
    }
  }
}

TEST_CASE("student t quantile against the integration oracle") {
  CHECK(student_t_quantile(3.0, 0.95) ==
        doctest::Approx(t_quantile_by_integration(3.0, 0.95)).epsilon(1e-6));
  CHECK(student_t_quantile(10.0, 0.9) ==
        doctest::Approx(t_quantile_by_integration(10.0, 0.9)).epsilon(1e-6));
  // Classic table value.
  CHECK(student_t_quantile(3.0, 0.95) == doctest::Approx(2.3534).epsilon(1e-4));
}
