#include "eagle/special_functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace eagle {

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: argument must be positive");
  return std::lgamma(x);
}

double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: argument must be positive");
  double acc = 0.0;
  // Shift into the asymptotic regime: ψ(x) = ψ(x+1) − 1/x.
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Asymptotic expansion with Bernoulli coefficients through x⁻¹².
  double series = std::log(x) - 0.5 * inv -
                  inv2 * (1.0 / 12.0 -
                          inv2 * (1.0 / 120.0 -
                                  inv2 * (1.0 / 252.0 -
                                          inv2 * (1.0 / 240.0 -
                                                  inv2 * (1.0 / 132.0 -
                                                          inv2 * (691.0 / 32760.0))))));
  return acc + series;
}

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("log_beta: arguments must be positive");
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cont_frac(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete_beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("incomplete_beta: a, b must be positive");
  if (x < 0.0 || x > 1.0) throw std::domain_error("incomplete_beta: x must lie in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cont_frac(a, b, x) / a;
  }
  return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - log_beta(b, a)) *
                   beta_cont_frac(b, a, 1.0 - x) / b;
}

double student_t_cdf(double nu, double t) {
  if (!(nu > 0.0)) throw std::domain_error("student_t_cdf: nu must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  const double x = nu / (nu + t * t);
  const double tail = 0.5 * incomplete_beta(nu / 2.0, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double nu, double p) {
  if (!(nu > 0.0)) throw std::domain_error("student_t_quantile: nu must be positive");
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("student_t_quantile: p must lie in (0,1)");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -student_t_quantile(nu, 1.0 - p);

  double lo = 0.0;
  double hi = 1.0;
  int guard = 0;
  while (student_t_cdf(nu, hi) < p) {
    hi *= 2.0;
    if (++guard > 2100) throw std::runtime_error("student_t_quantile: bracket expansion failed");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(nu, mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-14 * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace eagle
