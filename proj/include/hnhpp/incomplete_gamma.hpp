#pragma once

namespace hnhpp {

/// Regularized lower incomplete gamma P(a, y) = gamma(a, y) / Gamma(a).
/// Series expansion for y < a + 1, Lentz continued fraction otherwise.
double regularized_gamma_p(double a, double y);

/// Regularized upper incomplete gamma Q(a, y) = 1 - P(a, y).
double regularized_gamma_q(double a, double y);

/**
 * Lower incomplete gamma function gamma(a, y) = int_0^y u^(a-1) e^(-u) du.
 *
 * Tends to Gamma(a) as y -> infinity. Throws ValidationError for a <= 0 or y < 0.
 */
double lower_incomplete_gamma(double a, double y);

namespace detail {

/// sum_{n>=0} x^n / (a (a+1) ... (a+n)), so that gamma(a, x) = x^a e^-x * sum.
/// Converges for all x; used for x < a + 1.
double gamma_series(double a, double x);

/// Continued fraction h with Gamma(a, x) = x^a e^-x * h (upper incomplete).
/// Used for x >= a + 1.
double gamma_continued_fraction(double a, double x);

} // namespace detail

} // namespace hnhpp
