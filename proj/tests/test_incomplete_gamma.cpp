#include <cmath>

#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "hnhpp/errors.hpp"
#include "hnhpp/incomplete_gamma.hpp"

using namespace hnhpp;

namespace {

const double shapes[] = {1e-6, 0.01, 0.1, 0.5, 0.999, 1.0, 1.5, 2.7, 10.0, 57.3};
const double args[] = {1e-12, 1e-6, 0.01, 0.3, 1.0, 2.5, 9.9, 11.0, 40.0, 70.0, 300.0};

} // namespace

TEST(IncompleteGamma, RegularizedMatchesBoost)
{
    for (double a : shapes)
        for (double y : args)
        {
            const double p = boost::math::gamma_p(a, y);
            const double q = boost::math::gamma_q(a, y);
            EXPECT_NEAR(regularized_gamma_p(a, y), p, 1e-13 * std::max(p, 1e-300) + 1e-300) << a << " " << y;
            EXPECT_NEAR(regularized_gamma_q(a, y), q, 1e-12 * q + 1e-300) << a << " " << y;
        }
}

TEST(IncompleteGamma, LowerMatchesBoost)
{
    for (double a : shapes)
        for (double y : args)
        {
            const double want = boost::math::tgamma_lower(a, y);
            EXPECT_NEAR(lower_incomplete_gamma(a, y), want, 1e-13 * want) << a << " " << y;
        }
}

TEST(IncompleteGamma, ExponentialCase)
{
    // gamma(1, y) = 1 - e^-y
    for (double y : args)
        EXPECT_NEAR(lower_incomplete_gamma(1.0, y), -std::expm1(-y), 1e-15 * -std::expm1(-y));
}

TEST(IncompleteGamma, LimitsAndErrors)
{
    EXPECT_EQ(lower_incomplete_gamma(2.0, 0.0), 0.0);
    EXPECT_NEAR(lower_incomplete_gamma(3.5, 1e4), std::tgamma(3.5), 1e-14 * std::tgamma(3.5));
    EXPECT_THROW(lower_incomplete_gamma(0.0, 1.0), ValidationError);
    EXPECT_THROW(lower_incomplete_gamma(-1.0, 1.0), ValidationError);
    EXPECT_THROW(lower_incomplete_gamma(1.0, -1e-9), ValidationError);
}

TEST(IncompleteGamma, SeriesAndFractionAgreeAcrossSwitch)
{
    // both representations are valid near y = a + 1
    const double a = 3.0;
    const double y = a + 1.0;
    const double lower = std::exp(a * std::log(y) - y) * detail::gamma_series(a, y);
    const double upper = std::exp(a * std::log(y) - y) * detail::gamma_continued_fraction(a, y);
    EXPECT_NEAR(lower + upper, std::tgamma(a), 1e-14 * std::tgamma(a));
}
