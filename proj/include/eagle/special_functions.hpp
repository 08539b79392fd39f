#pragma once

namespace eagle {

// ln Γ(x), x > 0.
double log_gamma(double x);

// Digamma ψ(x), x > 0. Recurrence below 6, asymptotic series above;
// relative accuracy better than 1e-12 on that domain.
double digamma(double x);

// ln B(a, b), a, b > 0.
double log_beta(double a, double b);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// CDF of the Student-t distribution with nu degrees of freedom.
double student_t_cdf(double nu, double t);

// Quantile (inverse CDF) of the Student-t distribution, p in (0,1).
double student_t_quantile(double nu, double p);

}  // namespace eagle
