#include "hnhpp/incomplete_gamma.hpp"

#include <cmath>
#include <iterator>
#include <limits>
#include <string>

#include "hnhpp/errors.hpp"

namespace hnhpp {

namespace {

constexpr int max_iterations = 100000;
constexpr double eps = std::numeric_limits<double>::epsilon() * 0.5;
constexpr double tiny = 1e-300;

void check_arguments(double a, double y)
{
    if (!(a > 0.0) || !std::isfinite(a))
        throw ValidationError("incomplete gamma: shape must be positive and finite, got " + std::to_string(a));
    if (!(y >= 0.0))
        throw ValidationError("incomplete gamma: argument must be non-negative, got " + std::to_string(y));
}

// log of x^a e^-x / Gamma(a)
double log_prefactor(double a, double x) { return a * std::log(x) - x - std::lgamma(a); }

// x^a e^-x; pow keeps full relative precision when a log x is large
double prefactor(double a, double x)
{
    const double v = std::pow(x, a) * std::exp(-x);
    return std::isfinite(v) && v > 0.0 ? v : std::exp(a * std::log(x) - x);
}

// 1/Gamma(1 + a) - 1 for |a| <= 1/2 from the Taylor series of 1/Gamma
double rgamma1p_minus_one(double a)
{
    static constexpr double c[] = {
    5.7721566490153286e-1, -6.5587807152025388e-1, -4.2002635034095236e-2, 1.6653861138229149e-1,
    -4.2197734555544337e-2, -9.6219715278769736e-3, 7.2189432466630995e-3, -1.1651675918590651e-3,
    -2.1524167411495097e-4, 1.2805028238811619e-4, -2.0134854780788239e-5, -1.2504934821426707e-6,
    1.1330272319816959e-6, -2.0563384169776071e-7, 6.1160951044814158e-9, 5.0020076444692229e-9,
    -1.1812745704870201e-9, 1.0434267116911005e-10, 7.7822634399050713e-12, -3.6968056186422057e-12,
    5.100370287454476e-13, -2.0583260535665068e-14, -5.348122539423018e-15, 1.2267786282382608e-15,
    -1.1812593016974588e-16, 1.1866922547516003e-18};
    double sum = 0.0;
    for (int k = static_cast<int>(std::size(c)) - 1; k >= 0; --k)
        sum = sum * a + c[k];
    return sum * a;
}

// Q(a, y) for a < 1/2 and y < a + 1, where 1 - P cancels:
// Q = 1 - y^a / Gamma(1+a) + a y^a / Gamma(1+a) * sum_{n>=1} (-1)^(n+1) y^n / (n! (a+n))
double small_shape_q(double a, double y)
{
    const double g = rgamma1p_minus_one(a);
    const double ya_m1 = std::expm1(a * std::log(y));
    const double scale = (1.0 + ya_m1) * (1.0 + g);
    double term = 1.0;
    double sum = 0.0;
    for (int n = 1; n < max_iterations; ++n)
    {
        term *= -y / n;
        const double add = -term / (a + n);
        sum += add;
        if (std::fabs(add) < std::fabs(sum) * eps)
            return -(ya_m1 + g + ya_m1 * g) + scale * a * sum;
    }
    throw NumericalError("incomplete gamma small-shape series failed to converge");
}

} // namespace

namespace detail {

double gamma_series(double a, double x)
{
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < max_iterations; ++n)
    {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * eps)
            return sum;
    }
    throw NumericalError("incomplete gamma series failed to converge");
}

double gamma_continued_fraction(double a, double x)
{
    // modified Lentz on Gamma(a,x) = e^-x x^a (1/(x+1-a-) 1(1-a)/(x+3-a-) ...)
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < max_iterations; ++i)
    {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny)
            d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps)
            return h;
    }
    throw NumericalError("incomplete gamma continued fraction failed to converge");
}

} // namespace detail

double regularized_gamma_p(double a, double y)
{
    check_arguments(a, y);
    if (y == 0.0)
        return 0.0;
    if (std::isinf(y))
        return 1.0;
    if (y < a + 1.0)
        return std::exp(log_prefactor(a, y)) * detail::gamma_series(a, y);
    return 1.0 - std::exp(log_prefactor(a, y)) * detail::gamma_continued_fraction(a, y);
}

double regularized_gamma_q(double a, double y)
{
    check_arguments(a, y);
    if (y == 0.0)
        return 1.0;
    if (std::isinf(y))
        return 0.0;
    if (y < a + 1.0)
        return a < 0.5 ? small_shape_q(a, y) : 1.0 - std::exp(log_prefactor(a, y)) * detail::gamma_series(a, y);
    return std::exp(log_prefactor(a, y)) * detail::gamma_continued_fraction(a, y);
}

double lower_incomplete_gamma(double a, double y)
{
    check_arguments(a, y);
    if (y == 0.0)
        return 0.0;
    if (std::isinf(y))
        return std::tgamma(a);
    // below the split the unregularized series avoids a round trip through Gamma(a)
    if (y < a + 1.0)
        return prefactor(a, y) * detail::gamma_series(a, y);
    return std::exp(std::lgamma(a)) * regularized_gamma_p(a, y);
}

} // namespace hnhpp
