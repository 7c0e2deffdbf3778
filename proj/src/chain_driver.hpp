#pragma once

#include <chrono>
#include <cmath>
#include <limits>

#include "hnhpp/sampler.hpp"

namespace hnhpp::detail {

inline Draw make_draw(const MwgSampler& sampler, Algorithm algorithm)
{
    const auto& p = sampler.state().params;
    Draw d;
    d.model = p.model;
    d.beta = p.beta;
    d.kappa = p.kappa;
    d.lambda = p.lambda;
    d.phi = p.phi;
    d.psi = p.psi;
    d.tau = p.tau;
    const bool keep_theta = p.model == Model::Hybrid || algorithm == Algorithm::Gvs;
    d.theta = keep_theta ? p.theta : std::numeric_limits<double>::quiet_NaN();
    d.log_likelihood = sampler.log_likelihood();
    return d;
}

/// Burn-in, then kept_length * thinning iterations of `step(adapting)`.
/// `jumps` is the caller's model-move counter, reset together with the sampler's.
template <class Step>
Chain drive_chain(Algorithm algorithm, MwgSampler& sampler, const McmcConfig& config, Step&& step,
                  UpdateCounter* jumps = nullptr)
{
    const auto started = std::chrono::steady_clock::now();
    for (std::size_t k = 0; k < config.burn_in; ++k)
        step(config.adapt_during_burn_in);
    sampler.reset_acceptance();
    if (jumps)
        *jumps = {};

    Chain chain;
    chain.algorithm = algorithm;
    chain.prior_model_prob_0 = config.prior_model_prob_0;
    chain.draws.reserve(config.kept_length);
    for (std::size_t k = 0; k < config.kept_length; ++k)
    {
        for (std::size_t j = 0; j < config.thinning; ++j)
            step(false);
        chain.draws.push_back(make_draw(sampler, algorithm));
        if (k % config.eps_every == 0)
            chain.eps_records.push_back({k, sampler.state().eps});
    }
    chain.acceptance = sampler.acceptance();
    if (jumps)
        chain.acceptance.model_jump = *jumps;
    chain.final_scales = sampler.scales();
    chain.final_state = sampler.state();
    chain.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return chain;
}

} // namespace hnhpp::detail
