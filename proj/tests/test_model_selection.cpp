#include <cmath>

#include <gtest/gtest.h>

#include "geweke.hpp"
#include "hnhpp/errors.hpp"
#include "hnhpp/sampler.hpp"
#include "hnhpp/simulator.hpp"

using namespace hnhpp;

TEST(BayesFactor, ReportedCountArithmetic)
{
    // 20000 draws: 7584 in M=0 with pi(M=0) = 1e-9, and 7344 with pi(M=0) = 1e-10
    const auto a = bayes_factor(7584, 12416, 1e-9);
    EXPECT_EQ(a.kind, BayesFactor::Kind::Estimate);
    EXPECT_NEAR(a.value, 1.637e-9, 0.0005e-9);
    const auto b = bayes_factor(7344, 12656, 1e-10);
    EXPECT_NEAR(b.value, 1.723e-10, 0.0005e-10);
    EXPECT_NEAR(a.value, (12416.0 / 7584.0) * 1e-9 / (1.0 - 1e-9), 1e-14 * a.value);
}

TEST(BayesFactor, BalancedPriorAndBounds)
{
    EXPECT_DOUBLE_EQ(bayes_factor(100, 300, 0.5).value, 3.0);
    const auto lower = bayes_factor(0, 50, 0.5);
    EXPECT_EQ(lower.kind, BayesFactor::Kind::LowerBound);
    EXPECT_DOUBLE_EQ(lower.value, 50.0);
    const auto upper = bayes_factor(40, 0, 0.5);
    EXPECT_EQ(upper.kind, BayesFactor::Kind::UpperBound);
    EXPECT_DOUBLE_EQ(upper.value, 1.0 / 40.0);
    EXPECT_THROW(bayes_factor(0, 0, 0.5), ValidationError);
    EXPECT_THROW(bayes_factor(1, 1, 1.0), ValidationError);

    Chain chain;
    chain.draws.resize(10);
    for (int k = 0; k < 4; ++k)
        chain.draws[k].model = Model::Hybrid;
    EXPECT_DOUBLE_EQ(bayes_factor(chain, 0.2).value, (4.0 / 6.0) * 0.25);
}

TEST(Pseudoprior, MethodOfMoments)
{
    const std::vector<double> draws{1.0, 2.0, 3.0, 4.0};
    // mean 2.5, sample variance 5/3
    const auto spec = fit_pseudoprior(draws);
    EXPECT_NEAR(spec.shape, 2.5 * 2.5 / (5.0 / 3.0), 1e-14);
    EXPECT_NEAR(spec.rate, 2.5 / (5.0 / 3.0), 1e-14);
    EXPECT_THROW(fit_pseudoprior(std::vector<double>{1.0}), ValidationError);
    EXPECT_THROW(fit_pseudoprior(std::vector<double>{2.0, 2.0}), NumericalError);

    Chain chain;
    chain.draws.resize(3);
    chain.draws[0].model = Model::Hybrid, chain.draws[0].theta = 1.0;
    chain.draws[1].model = Model::PowerLaw, chain.draws[1].theta = 100.0;
    chain.draws[2].model = Model::Hybrid, chain.draws[2].theta = 3.0;
    const auto from_chain = fit_pseudoprior(chain);
    EXPECT_NEAR(from_chain.shape / from_chain.rate, 2.0, 1e-14);
}

namespace {

using Transition = std::function<SamplerState(const SamplerState&, const EventCascade&, std::uint64_t)>;

// successive-conditional check over (M, parameters): M must keep its prior law
void check_model_prior_recovered(const Transition& step, double pi0)
{
    const auto priors = geweke::informative_priors();
    const geweke::Design design;
    const auto cov = center_covariates(design.followers);
    Rng rng(4242);
    SamplerState state;
    state.params = geweke::draw_from_prior(priors, Model::PowerLaw, rng);
    state.eps = draw_random_effects(design.times.size(), state.params.tau, rng).eps;

    const int n = 40000;
    std::vector<double> in_zero, theta_in_one;
    for (int k = 0; k < n; ++k)
    {
        const auto data = geweke::simulate_data(design, cov, state, rng);
        state = step(state, data, static_cast<std::uint64_t>(k));
        in_zero.push_back(state.params.model == Model::PowerLaw ? 1.0 : 0.0);
        if (state.params.model == Model::Hybrid)
            theta_in_one.push_back(state.params.theta);
    }
    const auto m = geweke::batch_mean(in_zero);
    EXPECT_LT(std::fabs(m.mean - pi0), 4.0 * m.se + 0.005) << "P(M=0) " << m.mean << " se " << m.se;
    const auto t = geweke::batch_mean(theta_in_one);
    EXPECT_LT(std::fabs(t.mean - priors.a_theta / priors.b_theta), 4.0 * t.se) << "theta " << t.mean;
}

McmcConfig one_step(double pi0, std::uint64_t seed)
{
    McmcConfig c;
    c.burn_in = 0;
    c.kept_length = 1;
    c.eps_every = 1;
    c.adapt_during_burn_in = false;
    c.prior_model_prob_0 = pi0;
    c.seed = seed;
    c.scales = {0.3, 0.15, 0.1, 2.0, 0.006, 0.8};
    return c;
}

} // namespace

TEST(Gvs, SuccessiveConditionalRecoversModelPrior)
{
    const auto priors = geweke::informative_priors();
    // a pseudoprior away from the prior still leaves the joint invariant
    const PseudopriorSpec pseudo{6.0, 500.0};
    const double pi0 = 0.3;
    check_model_prior_recovered(
        [&](const SamplerState& s, const EventCascade& data, std::uint64_t k) {
            const auto cov = center_covariates(data.follower_counts);
            return gvs_run(data, cov, priors, pseudo, one_step(pi0, k + 1), s).final_state;
        },
        pi0);
}

TEST(Rjmcmc, SuccessiveConditionalRecoversModelPrior)
{
    const auto priors = geweke::informative_priors();
    const PseudopriorSpec pseudo{6.0, 500.0};
    const double pi0 = 0.6;
    JumpProbabilities jumps{0.4, 0.7};
    check_model_prior_recovered(
        [&](const SamplerState& s, const EventCascade& data, std::uint64_t k) {
            const auto cov = center_covariates(data.follower_counts);
            return rjmcmc_run(data, cov, priors, pseudo, one_step(pi0, k + 1), jumps, s).final_state;
        },
        pi0);
}

TEST(Gvs, StoresPseudopriorThetaInModelZero)
{
    const geweke::Design design;
    const auto cov = center_covariates(design.followers);
    Rng rng(3);
    SamplerState s;
    s.params = geweke::draw_from_prior(geweke::informative_priors(), Model::PowerLaw, rng);
    s.eps.assign(design.times.size(), 0.0);
    const auto data = geweke::simulate_data(design, cov, s, rng);
    McmcConfig c = one_step(0.5, 1);
    c.kept_length = 200;
    const auto chain = gvs_run(data, cov, geweke::informative_priors(), PseudopriorSpec{4.0, 400.0}, c, s);
    for (const auto& d : chain.draws)
        EXPECT_GT(d.theta, 0.0);
    EXPECT_EQ(chain.algorithm, Algorithm::Gvs);
    EXPECT_GT(chain.acceptance.model_jump.proposed, 0u);

    const auto rj = rjmcmc_run(data, cov, geweke::informative_priors(), PseudopriorSpec{4.0, 400.0}, c, {}, s);
    for (const auto& d : rj.draws)
        EXPECT_EQ(std::isnan(d.theta), d.model == Model::PowerLaw);
}

TEST(Rebalance, FindsPriorVisitingBothModels)
{
    // strong evidence for M=0: the power-law truth over a long window
    ScalarParams truth;
    truth.beta = 0.5;
    truth.kappa = -0.05;
    truth.lambda = 0.6;
    truth.phi = 0.03;
    truth.psi = 40.0;
    truth.tau = 2.0;
    std::vector<double> times;
    std::vector<std::int64_t> followers;
    for (int i = 0; i < 150; ++i)
    {
        times.push_back(150.0 * i);
        followers.push_back((i * 53) % 700);
    }
    const auto sim = simulate_cascade(times, followers, truth, 36000.0, 17);

    McmcConfig pilot;
    pilot.burn_in = 1000;
    pilot.kept_length = 1500;
    const auto pilot_chain = run_chain(Model::Hybrid, sim.cascade, sim.covariates, PriorSpec{}, pilot);
    const auto pseudo = fit_pseudoprior(pilot_chain);

    McmcConfig probe;
    probe.burn_in = 200;
    probe.kept_length = 1500;
    probe.seed = 9;
    const double pi0 = rebalance_model_prior(sim.cascade, sim.covariates, PriorSpec{}, pseudo, probe,
                                             pilot_chain.final_state);
    EXPECT_LT(pi0, 1e-3);
    McmcConfig run = probe;
    run.prior_model_prob_0 = pi0;
    run.kept_length = 4000;
    run.seed = 10;
    const auto chain = gvs_run(sim.cascade, sim.covariates, PriorSpec{}, pseudo, run, pilot_chain.final_state);
    const auto bf = bayes_factor(chain, pi0);
    EXPECT_GT(bf.count_0, 400u);
    EXPECT_GT(bf.count_1, 400u);
    EXPECT_LT(bf.value, 1.0);
}
