#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "hnhpp/errors.hpp"
#include "hnhpp/model.hpp"
#include "oracle.hpp"

using namespace hnhpp;

TEST(Kernel, PowerLawClosedFormMatchesQuadrature)
{
    for (double lambda : {-0.8, -0.1, 0.0, 0.3, 0.6, 0.95})
        for (double psi : {0.0, 0.01, 1.0, 60.0, 5000.0})
            for (double L : {1e-3, 0.5, 30.0, 36000.0})
            {
                if (psi == 0.0 && lambda > 0.9)
                    continue;
                const double want = oracle::kernel_integral(L, lambda, psi, 0.0);
                const double got = std::exp(log_kernel_integral(L, lambda, psi, 0.0));
                EXPECT_NEAR(got, want, 1e-10 * want) << lambda << " " << psi << " " << L;
            }
}

TEST(Kernel, HybridMatchesQuadrature)
{
    for (double lambda : {-0.7, 0.0, 0.4, 0.8})
        for (double psi : {0.0, 0.2, 60.0, 3000.0})
            for (double theta : {1e-9, 3e-5, 0.01, 2.0})
                for (double L : {1e-4, 0.3, 100.0, 36000.0})
                {
                    const double want = oracle::kernel_integral(L, lambda, psi, theta);
                    const double got = std::exp(log_kernel_integral(L, lambda, psi, theta));
                    EXPECT_NEAR(got, want, 1e-9 * want) << lambda << " " << psi << " " << theta << " " << L;
                }
}

TEST(Kernel, ShortSpansRelativeToPsi)
{
    // the two endpoint terms nearly cancel here
    for (double theta : {1e-6, 1e-2})
        for (double L : {1e-9, 1e-6, 1e-3})
        {
            const double want = oracle::kernel_integral(L, 0.5, 100.0, theta);
            EXPECT_NEAR(std::exp(log_kernel_integral(L, 0.5, 100.0, theta)), want, 1e-10 * want);
        }
}

TEST(Kernel, ZeroSpanAndEvaluatorAgreement)
{
    EXPECT_EQ(log_kernel_integral(0.0, 0.5, 1.0, 0.0), -std::numeric_limits<double>::infinity());
    const KernelEvaluator k(0.3, 12.0, 1e-4);
    for (double L : {0.1, 10.0, 1e4})
        EXPECT_EQ(k.log_value(L), log_kernel_integral(L, 0.3, 12.0, 1e-4));
}

TEST(Kernel, ThetaToZeroIsContinuous)
{
    for (double lambda : {-0.5, 0.2, 0.7})
        for (double L : {1.0, 1e3, 1e5})
        {
            const double k0 = log_kernel_integral(L, lambda, 30.0, 0.0);
            const double k1 = log_kernel_integral(L, lambda, 30.0, 1e-14);
            EXPECT_NEAR(k1, k0, 1e-8 * std::fabs(k0) + 1e-8);
        }
}

TEST(Intensity, PointValues)
{
    ScalarParams p;
    p.lambda = 0.5;
    p.phi = 2.0;
    p.psi = 3.0;
    // 2 e^0.1 (4 + 3)^-0.5
    EXPECT_NEAR(intensity(4.0, 0.0, 0.1, p), 2.0 * std::exp(0.1) / std::sqrt(7.0), 1e-15);
    EXPECT_EQ(intensity(-1.0, 0.0, 0.0, p), 0.0);
    p.model = Model::Hybrid;
    p.theta = 0.25;
    EXPECT_NEAR(intensity(4.0, 0.0, 0.1, p), 2.0 * std::exp(0.1) / std::sqrt(7.0) * std::exp(-1.0), 1e-15);
}

TEST(Intensity, SingularityAtOrigin)
{
    ScalarParams p;
    p.lambda = 0.5;
    p.psi = 0.0;
    EXPECT_THROW(intensity(2.0, 2.0, 0.0, p), DegenerateDataError);
    p.lambda = 0.0;
    EXPECT_NEAR(intensity(2.0, 2.0, 0.0, p), 1.0, 0.0);
}

TEST(CumulativeIntensity, MatchesQuadrature)
{
    ScalarParams p;
    p.model = Model::Hybrid;
    p.lambda = 0.35;
    p.phi = 0.04;
    p.psi = 20.0;
    p.theta = 2e-4;
    const double want = 0.04 * std::exp(0.3) * oracle::kernel_integral(5000.0, 0.35, 20.0, 2e-4);
    EXPECT_NEAR(cumulative_intensity(6000.0, 1000.0, 0.3, p), want, 1e-10 * want);
    EXPECT_EQ(cumulative_intensity(10.0, 10.0, 0.3, p), 0.0);
    EXPECT_THROW(cumulative_intensity(10.0, 11.0, 0.0, p), ValidationError);
}

TEST(LogLikelihood, MatchesGenericFormOnRandomCases)
{
    std::mt19937_64 gen(2024);
    for (int k = 0; k < 60; ++k)
    {
        const auto model = k % 2 ? Model::Hybrid : Model::PowerLaw;
        const auto c = oracle::random_small_case(gen, model);
        const double want = oracle::generic_log_likelihood(c.cascade, c.covariates, c.eps, c.params);
        const double got = log_likelihood(c.cascade, c.covariates, LatentEffects{c.eps}, c.params);
        EXPECT_NEAR(got, want, 1e-8 * std::fabs(want)) << "case " << k;
    }
}

TEST(LogLikelihood, DegenerateAndInvalidInputs)
{
    EventCascade c;
    c.horizon = 10.0;
    c.original_times = {1.0};
    c.follower_counts = {5};
    c.retweet_times = {{1.0, 2.0}};
    Covariates cov{{0.0}};
    ScalarParams p;
    p.psi = 0.0;
    p.lambda = 0.4;
    EXPECT_THROW(log_likelihood(c, cov, LatentEffects{{0.0}}, p), DegenerateDataError);
    p.lambda = -0.4;
    EXPECT_EQ(log_likelihood(c, cov, LatentEffects{{0.0}}, p), -std::numeric_limits<double>::infinity());

    p.psi = 1.0;
    p.lambda = 0.4;
    c.retweet_times = {{11.0}};
    EXPECT_THROW(log_likelihood(c, cov, LatentEffects{{0.0}}, p), ValidationError);
    c.retweet_times = {{0.5}};
    EXPECT_THROW(log_likelihood(c, cov, LatentEffects{{0.0}}, p), ValidationError);
    c.retweet_times = {{2.0}};
    EXPECT_THROW(log_likelihood(c, cov, LatentEffects{{0.0, 1.0}}, p), ValidationError);
    p.lambda = 1.0;
    EXPECT_THROW(log_likelihood(c, cov, LatentEffects{{0.0}}, p), ValidationError);
}

TEST(Params, Validation)
{
    ScalarParams p;
    EXPECT_NO_THROW(p.validate());
    p.model = Model::Hybrid;
    EXPECT_THROW(p.validate(), ValidationError);  // theta = 0
    p.theta = 1e-5;
    EXPECT_NO_THROW(p.validate());
    p.phi = 0.0;
    EXPECT_THROW(p.validate(), ValidationError);
    p.phi = 1.0;
    p.psi = -1e-9;
    EXPECT_THROW(p.validate(), ValidationError);
    p.psi = 0.0;
    p.tau = 0.0;
    EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Covariates, CentredLogFollowers)
{
    const std::vector<std::int64_t> counts{0, 9, 99};
    const auto cov = center_covariates(counts);
    const double mean = (std::log(1.0) + std::log(10.0) + std::log(100.0)) / 3.0;
    EXPECT_NEAR(cov.x[0], -mean, 1e-15);
    EXPECT_NEAR(cov.x[1], std::log(10.0) - mean, 1e-15);
    EXPECT_NEAR(cov.x[0] + cov.x[1] + cov.x[2], 0.0, 1e-15);
    EXPECT_THROW(center_covariates(std::vector<std::int64_t>{}), ValidationError);
    EXPECT_THROW(center_covariates(std::vector<std::int64_t>{-1}), ValidationError);
}

TEST(Cascade, CountsAndValidation)
{
    EventCascade c;
    c.horizon = 5.0;
    c.original_times = {0.0, 1.0, 2.0};
    c.follower_counts = {1, 2, 3};
    c.retweet_times = {{0.5, 4.0}, {}, {2.0}};
    EXPECT_EQ(c.total_retweets(), 3u);
    EXPECT_EQ(c.retweeted_originals(), 2u);
    EXPECT_NO_THROW(c.validate());
    c.retweet_times[0] = {4.0, 0.5};
    EXPECT_THROW(c.validate(), ValidationError);
    c.retweet_times[0] = {0.5};
    c.original_times[2] = 6.0;
    EXPECT_THROW(c.validate(), ValidationError);
}
