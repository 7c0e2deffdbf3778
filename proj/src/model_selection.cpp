#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "chain_driver.hpp"
#include "hnhpp/errors.hpp"
#include "hnhpp/numeric.hpp"
#include "hnhpp/sampler.hpp"

namespace hnhpp {

namespace {

double draw_pseudoprior(Rng& rng, const PseudopriorSpec& pseudo)
{
    std::gamma_distribution<double> dist(pseudo.shape, 1.0 / pseudo.rate);
    double theta = dist(rng);
    // a gamma draw can underflow to zero for tiny shapes; keep it in the support
    if (!(theta > 0.0))
        theta = std::numeric_limits<double>::min();
    return theta;
}

SamplerState selection_start(const EventCascade& cascade, const Covariates& covariates,
                             const PseudopriorSpec& pseudo, std::optional<SamplerState> start)
{
    if (start)
    {
        if (!(start->params.theta > 0.0))
            start->params.theta = pseudo.shape / pseudo.rate;
        return std::move(*start);
    }
    SamplerState state = initial_state(Model::PowerLaw, cascade, covariates);
    state.params.theta = pseudo.shape / pseudo.rate;
    return state;
}

} // namespace

PseudopriorSpec fit_pseudoprior(const std::vector<double>& theta_draws)
{
    CompensatedSum sum;
    std::size_t n = 0;
    for (double t : theta_draws)
    {
        if (!std::isfinite(t) || !(t > 0.0))
            continue;
        sum += t;
        ++n;
    }
    if (n < 2)
        throw ValidationError("fit_pseudoprior: need at least two positive theta draws");
    const double mean = sum.value() / static_cast<double>(n);
    CompensatedSum sq;
    for (double t : theta_draws)
        if (std::isfinite(t) && t > 0.0)
            sq += (t - mean) * (t - mean);
    const double var = sq.value() / static_cast<double>(n - 1);
    if (!(var > 0.0))
        throw NumericalError("fit_pseudoprior: theta draws have zero variance");
    PseudopriorSpec spec{mean * mean / var, mean / var};
    spec.validate();
    return spec;
}

PseudopriorSpec fit_pseudoprior(const Chain& pilot)
{
    std::vector<double> thetas;
    thetas.reserve(pilot.draws.size());
    for (const auto& d : pilot.draws)
        if (d.model == Model::Hybrid)
            thetas.push_back(d.theta);
    return fit_pseudoprior(thetas);
}

Chain gvs_run(const EventCascade& cascade, const Covariates& covariates, const PriorSpec& priors,
              const PseudopriorSpec& pseudoprior, const McmcConfig& config, std::optional<SamplerState> start)
{
    config.validate();
    pseudoprior.validate();
    MwgSampler sampler(cascade, covariates, priors, selection_start(cascade, covariates, pseudoprior, std::move(start)),
                       config.scales);
    if (!std::isfinite(sampler.log_likelihood()))
        throw NumericalError("gvs_run: log-likelihood is not finite at the starting point");

    const double log_pi0 = std::log(config.prior_model_prob_0);
    const double log_pi1 = std::log1p(-config.prior_model_prob_0);
    Rng rng = Rng::substream(config.seed, stream_key("gvs"));
    UpdateCounter switches;
    std::size_t sweeps = 0;

    auto step = [&](bool adapting) {
        sampler.sweep(rng);
        if (adapting)
            sampler.adapt(sweeps);
        ++sweeps;

        const bool in_hybrid = sampler.state().params.model == Model::Hybrid;
        if (!in_hybrid)
            sampler.set_inactive_theta(draw_pseudoprior(rng, pseudoprior));
        const double theta = sampler.state().params.theta;
        const double ll_current = sampler.log_likelihood();
        const double ll0 = in_hybrid ? sampler.log_likelihood_under(Model::PowerLaw, theta) : ll_current;
        const double ll1 = in_hybrid ? ll_current : sampler.log_likelihood_under(Model::Hybrid, theta);
        const double log_a0 = ll0 + pseudoprior.log_density(theta) + log_pi0;
        const double log_a1 = ll1 + priors.log_prior_theta(theta) + log_pi1;
        const double p1 = 1.0 / (1.0 + std::exp(log_a0 - log_a1));
        const Model next = rng.uniform() < p1 ? Model::Hybrid : Model::PowerLaw;

        ++switches.proposed;
        if (next != sampler.state().params.model)
        {
            ++switches.accepted;
            sampler.switch_model(next, theta);
        }
    };
    return detail::drive_chain(Algorithm::Gvs, sampler, config, step, &switches);
}

void JumpProbabilities::validate() const
{
    if (!(p01 > 0.0 && p01 <= 1.0) || !(p10 > 0.0 && p10 <= 1.0))
        throw ValidationError("rjmcmc: jump probabilities must lie in (0, 1]");
}

Chain rjmcmc_run(const EventCascade& cascade, const Covariates& covariates, const PriorSpec& priors,
                 const PseudopriorSpec& pseudoprior, const McmcConfig& config, const JumpProbabilities& jumps,
                 std::optional<SamplerState> start)
{
    config.validate();
    pseudoprior.validate();
    jumps.validate();
    MwgSampler sampler(cascade, covariates, priors, selection_start(cascade, covariates, pseudoprior, std::move(start)),
                       config.scales);
    if (!std::isfinite(sampler.log_likelihood()))
        throw NumericalError("rjmcmc_run: log-likelihood is not finite at the starting point");

    const double log_pi0 = std::log(config.prior_model_prob_0);
    const double log_pi1 = std::log1p(-config.prior_model_prob_0);
    const double log_p01 = std::log(jumps.p01);
    const double log_p10 = std::log(jumps.p10);
    Rng rng = Rng::substream(config.seed, stream_key("rjmcmc"));
    UpdateCounter moves;
    std::size_t sweeps = 0;

    auto step = [&](bool adapting) {
        const bool in_hybrid = sampler.state().params.model == Model::Hybrid;
        const double p_jump = in_hybrid ? jumps.p10 : jumps.p01;
        if (rng.uniform() >= p_jump)
        {
            sampler.sweep(rng);
            if (adapting)
                sampler.adapt(sweeps);
            ++sweeps;
            return;
        }

        ++moves.proposed;
        const double theta = in_hybrid ? sampler.state().params.theta : draw_pseudoprior(rng, pseudoprior);
        const double ll_current = sampler.log_likelihood();
        const double ll0 = in_hybrid ? sampler.log_likelihood_under(Model::PowerLaw, theta) : ll_current;
        const double ll1 = in_hybrid ? ll_current : sampler.log_likelihood_under(Model::Hybrid, theta);
        const double side0 = ll0 + pseudoprior.log_density(theta) + log_pi0 + log_p01;
        const double side1 = ll1 + priors.log_prior_theta(theta) + log_pi1 + log_p10;
        const double log_ratio = in_hybrid ? side0 - side1 : side1 - side0;
        if (std::isnan(log_ratio))
            return;
        if (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio)
        {
            ++moves.accepted;
            sampler.switch_model(in_hybrid ? Model::PowerLaw : Model::Hybrid, theta);
        }
    };
    return detail::drive_chain(Algorithm::Rjmcmc, sampler, config, step, &moves);
}

BayesFactor bayes_factor(std::size_t count_0, std::size_t count_1, double prior_model_prob_0)
{
    if (!(prior_model_prob_0 > 0.0 && prior_model_prob_0 < 1.0))
        throw ValidationError("bayes_factor: prior_model_prob_0 must lie in (0, 1)");
    if (count_0 == 0 && count_1 == 0)
        throw ValidationError("bayes_factor: no draws");
    BayesFactor bf;
    bf.count_0 = count_0;
    bf.count_1 = count_1;
    double n0 = static_cast<double>(count_0);
    double n1 = static_cast<double>(count_1);
    // an unvisited model only bounds the ratio; count it as one visit
    if (count_0 == 0)
    {
        bf.kind = BayesFactor::Kind::LowerBound;
        n0 = 1.0;
    }
    else if (count_1 == 0)
    {
        bf.kind = BayesFactor::Kind::UpperBound;
        n1 = 1.0;
    }
    const double log_bf = std::log(n1) - std::log(n0) + std::log(prior_model_prob_0) - std::log1p(-prior_model_prob_0);
    bf.value = std::exp(log_bf);
    return bf;
}

BayesFactor bayes_factor(const Chain& chain, double prior_model_prob_0)
{
    std::size_t n1 = 0;
    for (const auto& d : chain.draws)
        n1 += d.model == Model::Hybrid ? 1 : 0;
    return bayes_factor(chain.draws.size() - n1, n1, prior_model_prob_0);
}

double rebalance_model_prior(const EventCascade& cascade, const Covariates& covariates, const PriorSpec& priors,
                             const PseudopriorSpec& pseudoprior, const McmcConfig& probe,
                             std::optional<SamplerState> start, int max_rounds, double min_share)
{
    if (max_rounds < 1)
        throw ValidationError("rebalance_model_prior: max_rounds must be at least 1");
    if (!(min_share > 0.0 && min_share <= 0.5))
        throw ValidationError("rebalance_model_prior: min_share must lie in (0, 0.5]");

    McmcConfig config = probe;
    std::optional<SamplerState> state = std::move(start);
    for (int round = 0; round < max_rounds; ++round)
    {
        config.seed = mix64(probe.seed ^ mix64(static_cast<std::uint64_t>(round) + 1));
        const Chain chain = gvs_run(cascade, covariates, priors, pseudoprior, config, state);
        state = chain.final_state;
        config.scales = chain.final_scales;

        std::size_t n1 = 0;
        for (const auto& d : chain.draws)
            n1 += d.model == Model::Hybrid ? 1 : 0;
        const std::size_t n0 = chain.draws.size() - n1;
        const double total = static_cast<double>(chain.draws.size());
        if (static_cast<double>(std::min(n0, n1)) >= min_share * total)
            return config.prior_model_prob_0;

        const double pi0 = config.prior_model_prob_0;
        const double log_bf = std::log(n1 + 0.5) - std::log(n0 + 0.5) + std::log(pi0) - std::log1p(-pi0);
        // prior odds pi0/pi1 = B_10 balances the posterior
        double next = 1.0 / (1.0 + std::exp(-log_bf));
        next = std::clamp(next, 1e-300, 1.0 - 1e-15);
        config.prior_model_prob_0 = next;
    }
    return config.prior_model_prob_0;
}

} // namespace hnhpp
