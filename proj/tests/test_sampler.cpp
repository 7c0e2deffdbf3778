#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "geweke.hpp"
#include "hnhpp/errors.hpp"
#include "hnhpp/sampler.hpp"
#include "hnhpp/simulator.hpp"
#include "oracle.hpp"

using namespace hnhpp;

namespace {

struct Fixture
{
    EventCascade cascade;
    Covariates covariates;
};

Fixture small_data(std::uint64_t seed, Model model)
{
    ScalarParams truth;
    truth.model = model;
    truth.beta = 0.5;
    truth.kappa = -0.05;
    truth.lambda = 0.6;
    truth.phi = 0.05;
    truth.psi = 30.0;
    truth.tau = 2.0;
    truth.theta = model == Model::Hybrid ? 2e-4 : 0.0;
    std::vector<double> times;
    std::vector<std::int64_t> followers;
    for (int i = 0; i < 40; ++i)
    {
        times.push_back(200.0 * i);
        followers.push_back((i * 37) % 500);
    }
    auto sim = simulate_cascade(times, followers, truth, 10000.0, seed);
    return {sim.cascade, sim.covariates};
}

double integrate(const std::function<double(double)>& f, double lo, double hi)
{
    boost::math::quadrature::tanh_sinh<double> q;
    return q.integrate(f, lo, hi, 1e-12);
}

} // namespace

TEST(Priors, DensitiesAreNormalised)
{
    PriorSpec p;
    p.mu_beta = 1.0;
    p.tau_beta = 0.25;
    p.tau_kappa = 9.0;
    p.a_lambda = 2.5;
    p.b_lambda = 3.0;
    p.a_psi = 0.7;
    p.b_psi = 0.2;
    p.a_theta = 3.0;
    p.b_theta = 1e3;
    auto ex = [](auto f) { return [f](double x) { return std::exp(f(x)); }; };
    boost::math::quadrature::gauss_kronrod<double, 61> gk;
    EXPECT_NEAR(gk.integrate(ex([&](double x) { return p.log_prior_beta(x); }), -60.0, 60.0), 1.0, 1e-10);
    EXPECT_NEAR(gk.integrate(ex([&](double x) { return p.log_prior_kappa(x); }), -10.0, 10.0), 1.0, 1e-10);
    EXPECT_NEAR(integrate(ex([&](double x) { return p.log_prior_lambda(x); }), -40.0, 1.0), 1.0, 1e-9);
    EXPECT_NEAR(integrate(ex([&](double x) { return p.log_prior_psi(x); }), 0.0, 400.0), 1.0, 1e-9);
    EXPECT_NEAR(integrate(ex([&](double x) { return p.log_prior_theta(x); }), 0.0, 0.05), 1.0, 1e-9);
    PseudopriorSpec pseudo{2.2, 3.6e5};
    EXPECT_NEAR(integrate(ex([&](double x) { return pseudo.log_density(x); }), 0.0, 1e-3), 1.0, 1e-9);
}

TEST(Priors, SupportAndDefaults)
{
    PriorSpec p;
    EXPECT_EQ(p.log_prior_lambda(1.0), -INFINITY);
    EXPECT_EQ(p.log_prior_psi(-1.0), -INFINITY);
    EXPECT_EQ(p.log_prior_theta(0.0), -INFINITY);
    // Gamma(1, 0.001) on psi is an exponential with rate 0.001
    EXPECT_NEAR(p.log_prior_psi(0.0), std::log(0.001), 1e-15);
    EXPECT_NEAR(p.log_prior_psi(50.0), std::log(0.001) - 0.05, 1e-14);
    EXPECT_NEAR(p.log_prior_beta(0.0), 0.5 * std::log(1e-4 / (2.0 * M_PI)), 1e-14);
    p.a_phi = 0.0;
    EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Gibbs, PhiAndTauMatchConditionalMoments)
{
    for (Model model : {Model::PowerLaw, Model::Hybrid})
    {
        const auto data = small_data(3, model);
        SamplerState state = initial_state(model, data.cascade, data.covariates);
        state.params.beta = 0.4;
        state.params.kappa = -0.02;
        state.params.lambda = 0.55;
        state.params.psi = 25.0;
        for (std::size_t i = 0; i < state.eps.size(); ++i)
            state.eps[i] = 0.3 * std::sin(static_cast<double>(i));
        PriorSpec priors;
        MwgSampler sampler(data.cascade, data.covariates, priors, state, {});

        // independent conditional parameters
        const double theta = model == Model::Hybrid ? state.params.theta : 0.0;
        double weighted = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < state.eps.size(); ++i)
        {
            const double x = data.covariates.x[i];
            const double delta = 0.4 * x - 0.02 * x * x + state.eps[i];
            weighted += std::exp(delta) * oracle::kernel_integral(data.cascade.horizon - data.cascade.original_times[i],
                                                                  0.55, 25.0, theta);
            sq += state.eps[i] * state.eps[i];
        }
        const double phi_shape = priors.a_phi + static_cast<double>(data.cascade.total_retweets());
        const double phi_rate = priors.b_phi + weighted;
        const double tau_shape = priors.a_tau + 0.5 * static_cast<double>(state.eps.size());
        const double tau_rate = priors.b_tau + 0.5 * sq;
        EXPECT_NEAR(sampler.phi_conditional_rate(), phi_rate, 1e-9 * phi_rate);

        Rng rng(99);
        const int n = 100000;
        double s1 = 0, s2 = 0, t1 = 0, t2 = 0;
        for (int k = 0; k < n; ++k)
        {
            sampler.gibbs_phi(rng);
            sampler.gibbs_tau(rng);
            const double phi = sampler.state().params.phi, tau = sampler.state().params.tau;
            s1 += phi, s2 += phi * phi, t1 += tau, t2 += tau * tau;
        }
        auto check = [&](double sum, double sum_sq, double shape, double rate) {
            const double mean = shape / rate, var = shape / (rate * rate);
            const double m = sum / n, v = sum_sq / n - m * m;
            EXPECT_NEAR(m, mean, 3.0 * std::sqrt(var / n));
            // var of the sample variance for a gamma: (mu4 - var^2) / n, mu4 = 3 var^2 (1 + 2/shape)
            const double mu4 = 3.0 * var * var * (1.0 + 2.0 / shape);
            EXPECT_NEAR(v, var, 3.0 * std::sqrt((mu4 - var * var) / n));
        };
        check(s1, s2, phi_shape, phi_rate);
        check(t1, t2, tau_shape, tau_rate);
    }
}

TEST(Sampler, CachedLikelihoodTracksDirectEvaluation)
{
    for (Model model : {Model::PowerLaw, Model::Hybrid})
    {
        const auto data = small_data(5, model);
        MwgSampler sampler(data.cascade, data.covariates, PriorSpec{},
                           initial_state(model, data.cascade, data.covariates), {});
        Rng rng(1);
        for (int k = 0; k < 300; ++k)
        {
            sampler.sweep(rng);
            if (k < 200)
                sampler.adapt(static_cast<std::size_t>(k));
        }
        const auto& s = sampler.state();
        const double direct = log_likelihood(data.cascade, data.covariates, LatentEffects{s.eps}, s.params);
        EXPECT_NEAR(sampler.log_likelihood(), direct, 1e-9 * std::fabs(direct));
        const double other = model == Model::Hybrid ? 0.0 : 1e-4;
        const Model flip = model == Model::Hybrid ? Model::PowerLaw : Model::Hybrid;
        ScalarParams q = s.params;
        q.model = flip;
        q.theta = flip == Model::Hybrid ? other : s.params.theta;
        const double direct_flip = log_likelihood(data.cascade, data.covariates, LatentEffects{s.eps}, q);
        EXPECT_NEAR(sampler.log_likelihood_under(flip, flip == Model::Hybrid ? other : s.params.theta), direct_flip,
                    1e-9 * std::fabs(direct_flip));
    }
}

TEST(Sampler, ChainIsReproducible)
{
    const auto data = small_data(7, Model::PowerLaw);
    McmcConfig c;
    c.burn_in = 100;
    c.kept_length = 50;
    c.thinning = 3;
    c.eps_every = 10;
    c.seed = 123;
    const auto a = run_chain(Model::PowerLaw, data.cascade, data.covariates, PriorSpec{}, c);
    const auto b = run_chain(Model::PowerLaw, data.cascade, data.covariates, PriorSpec{}, c);
    ASSERT_EQ(a.draws.size(), 50u);
    EXPECT_EQ(a.eps_records.size(), 5u);
    for (std::size_t k = 0; k < a.draws.size(); ++k)
    {
        EXPECT_EQ(a.draws[k].beta, b.draws[k].beta);
        EXPECT_EQ(a.draws[k].psi, b.draws[k].psi);
        EXPECT_TRUE(std::isnan(a.draws[k].theta));
    }
    c.seed = 124;
    const auto d = run_chain(Model::PowerLaw, data.cascade, data.covariates, PriorSpec{}, c);
    EXPECT_NE(a.draws.back().beta, d.draws.back().beta);
}

TEST(Sampler, RejectsBadConfiguration)
{
    const auto data = small_data(7, Model::PowerLaw);
    McmcConfig c;
    c.thinning = 0;
    EXPECT_THROW(run_chain(Model::PowerLaw, data.cascade, data.covariates, PriorSpec{}, c), ValidationError);
    c = {};
    c.scales.psi = 0.0;
    EXPECT_THROW(run_chain(Model::PowerLaw, data.cascade, data.covariates, PriorSpec{}, c), ValidationError);
    c = {};
    auto start = initial_state(Model::Hybrid, data.cascade, data.covariates);
    EXPECT_THROW(run_chain(Model::PowerLaw, data.cascade, data.covariates, PriorSpec{}, c, start), ValidationError);
    start.eps.pop_back();
    EXPECT_THROW(run_chain(Model::Hybrid, data.cascade, data.covariates, PriorSpec{}, c, start), ValidationError);
}

TEST(Sampler, InitialState)
{
    const auto data = small_data(9, Model::Hybrid);
    const auto s = initial_state(Model::Hybrid, data.cascade, data.covariates);
    EXPECT_EQ(s.params.model, Model::Hybrid);
    EXPECT_DOUBLE_EQ(s.params.theta, 1.0 / data.cascade.horizon);
    EXPECT_NO_THROW(s.params.validate());
    // phi matches the observed total at the starting point
    double expected = 0.0;
    const KernelEvaluator k(0.5, 1.0, s.params.theta);
    for (std::size_t i = 0; i < s.eps.size(); ++i)
        expected += s.params.phi * std::exp(s.eps[i]) * k.value(data.cascade.horizon - data.cascade.original_times[i]);
    EXPECT_NEAR(expected, static_cast<double>(data.cascade.total_retweets()), 1e-9 * expected);
}

TEST(Sampler, AdaptationMovesScalesTowardTarget)
{
    const auto data = small_data(11, Model::PowerLaw);
    McmcConfig c;
    c.burn_in = 3000;
    c.kept_length = 2000;
    c.scales.lambda = 5.0;  // far too wide
    const auto chain = run_chain(Model::PowerLaw, data.cascade, data.covariates, PriorSpec{}, c);
    EXPECT_LT(chain.final_scales.lambda, 1.0);
    EXPECT_NEAR(chain.acceptance.lambda.rate(), 0.44, 0.15);
    EXPECT_NEAR(chain.acceptance.beta.rate(), 0.44, 0.15);
}

// joint prior-data simulation: one MWG sweep then fresh data, repeated
TEST(Sampler, SuccessiveConditionalRecoversPrior)
{
    for (Model model : {Model::PowerLaw, Model::Hybrid})
    {
        const auto priors = geweke::informative_priors();
        const geweke::Design design;
        const auto cov = center_covariates(design.followers);
        Rng rng(model == Model::Hybrid ? 77 : 78);
        SamplerState state;
        state.params = geweke::draw_from_prior(priors, model, rng);
        state.eps = draw_random_effects(design.times.size(), state.params.tau, rng).eps;
        ProposalScales scales{0.3, 0.15, 0.1, 2.0, 0.006, 0.8};

        const int n = 60000;
        std::vector<std::vector<double>> trace(7);
        for (int k = 0; k < n; ++k)
        {
            const auto data = geweke::simulate_data(design, cov, state, rng);
            state = mwg_sweep(state, data, cov, priors, scales, rng);
            const auto& p = state.params;
            const double values[] = {p.beta, p.kappa, p.lambda, p.phi, p.psi, p.tau, p.theta};
            for (int j = 0; j < 7; ++j)
                trace[j].push_back(values[j]);
        }
        const double means[] = {priors.mu_beta,
                                priors.mu_kappa,
                                1.0 - priors.a_lambda / priors.b_lambda,
                                priors.a_phi / priors.b_phi,
                                priors.a_psi / priors.b_psi,
                                priors.a_tau / priors.b_tau,
                                priors.a_theta / priors.b_theta};
        const char* names[] = {"beta", "kappa", "lambda", "phi", "psi", "tau", "theta"};
        for (int j = 0; j < (model == Model::Hybrid ? 7 : 6); ++j)
        {
            const auto m = geweke::batch_mean(trace[j]);
            EXPECT_LT(std::fabs(m.mean - means[j]), 4.0 * m.se) << names[j] << " mean " << m.mean << " prior "
                                                                  << means[j] << " se " << m.se;
        }
    }
}
