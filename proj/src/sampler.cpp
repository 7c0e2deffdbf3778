#include "hnhpp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "chain_driver.hpp"
#include "hnhpp/errors.hpp"
#include "hnhpp/numeric.hpp"

namespace hnhpp {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();
constexpr double target_acceptance = 0.44;

double log_normal_density(double x, double mean, double precision)
{
    const double d = x - mean;
    return 0.5 * std::log(precision / (2.0 * std::numbers::pi)) - 0.5 * precision * d * d;
}

double log_gamma_density(double x, double shape, double rate)
{
    if (x < 0.0 || std::isnan(x))
        return neg_inf;
    if (x == 0.0)
    {
        if (shape == 1.0)
            return std::log(rate);
        return shape < 1.0 ? std::numeric_limits<double>::infinity() : neg_inf;
    }
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

void require_positive(double v, const char* name)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw ValidationError(std::string("priors: ") + name + " must be positive and finite");
}

double draw_gamma(Rng& rng, double shape, double rate)
{
    std::gamma_distribution<double> dist(shape, 1.0 / rate);
    return dist(rng);
}

} // namespace

// --- priors -----------------------------------------------------------------

void PriorSpec::validate() const
{
    if (!std::isfinite(mu_beta) || !std::isfinite(mu_kappa))
        throw ValidationError("priors: normal means must be finite");
    require_positive(tau_beta, "tau_beta");
    require_positive(tau_kappa, "tau_kappa");
    require_positive(a_lambda, "a_lambda");
    require_positive(b_lambda, "b_lambda");
    require_positive(a_phi, "a_phi");
    require_positive(b_phi, "b_phi");
    require_positive(a_psi, "a_psi");
    require_positive(b_psi, "b_psi");
    require_positive(a_tau, "a_tau");
    require_positive(b_tau, "b_tau");
    require_positive(a_theta, "a_theta");
    require_positive(b_theta, "b_theta");
}

double PriorSpec::log_prior_beta(double beta) const { return log_normal_density(beta, mu_beta, tau_beta); }
double PriorSpec::log_prior_kappa(double kappa) const { return log_normal_density(kappa, mu_kappa, tau_kappa); }
double PriorSpec::log_prior_lambda(double lambda) const
{
    if (!(lambda < 1.0))
        return neg_inf;
    return log_gamma_density(1.0 - lambda, a_lambda, b_lambda);
}
double PriorSpec::log_prior_psi(double psi) const { return log_gamma_density(psi, a_psi, b_psi); }
double PriorSpec::log_prior_theta(double theta) const
{
    if (!(theta > 0.0))
        return neg_inf;
    return log_gamma_density(theta, a_theta, b_theta);
}

void PseudopriorSpec::validate() const
{
    if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate))
        throw ValidationError("pseudoprior: shape and rate must be positive and finite");
}

double PseudopriorSpec::log_density(double theta) const
{
    if (!(theta > 0.0))
        return neg_inf;
    return log_gamma_density(theta, shape, rate);
}

void McmcConfig::validate() const
{
    if (thinning < 1)
        throw ValidationError("mcmc: thinning must be at least 1");
    if (kept_length < 1)
        throw ValidationError("mcmc: kept_length must be at least 1");
    if (eps_every < 1)
        throw ValidationError("mcmc: eps_every must be at least 1");
    for (double s : {scales.beta, scales.kappa, scales.lambda, scales.psi, scales.theta, scales.eps})
        if (!(s > 0.0) || !std::isfinite(s))
            throw ValidationError("mcmc: proposal scales must be positive and finite");
    if (!(prior_model_prob_0 > 0.0 && prior_model_prob_0 < 1.0))
        throw ValidationError("mcmc: prior_model_prob_0 must lie in (0, 1)");
}

ScalarParams Draw::params() const
{
    ScalarParams p;
    p.model = model;
    p.beta = beta;
    p.kappa = kappa;
    p.lambda = lambda;
    p.phi = phi;
    p.psi = psi;
    p.tau = tau;
    p.theta = std::isnan(theta) ? 0.0 : theta;
    return p;
}

// --- sampler ----------------------------------------------------------------

MwgSampler::MwgSampler(const EventCascade& cascade, const Covariates& covariates, const PriorSpec& priors,
                       SamplerState initial, ProposalScales scales)
    : n_(cascade.size()), horizon_(cascade.horizon), priors_(priors), state_(std::move(initial)), scales_(scales)
{
    cascade.validate();
    priors_.validate();
    state_.params.validate();
    if (covariates.x.size() != n_ || state_.eps.size() != n_)
        throw ValidationError("sampler: covariates and eps must have one entry per original");

    x_ = covariates.x;
    x2_.resize(n_);
    spans_.resize(n_);
    counts_.resize(n_);
    offsets_begin_.resize(n_ + 1);
    CompensatedSum sum_mx, sum_mx2, sum_offsets;
    for (std::size_t i = 0; i < n_; ++i)
    {
        x2_[i] = x_[i] * x_[i];
        spans_[i] = cascade.horizon - cascade.original_times[i];
        const auto& times = cascade.retweet_times[i];
        counts_[i] = static_cast<double>(times.size());
        offsets_begin_[i] = offsets_.size();
        for (double t : times)
        {
            const double d = t - cascade.original_times[i];
            offsets_.push_back(d);
            sum_offsets += d;
        }
        sum_mx += counts_[i] * x_[i];
        sum_mx2 += counts_[i] * x2_[i];
    }
    offsets_begin_[n_] = offsets_.size();
    total_count_ = static_cast<double>(offsets_.size());
    sum_mx_ = sum_mx.value();
    sum_mx2_ = sum_mx2.value();
    sum_offsets_ = sum_offsets.value();

    delta_.resize(n_);
    weight_.resize(n_);
    kernel_.resize(n_);
    proposal_kernel_.resize(n_);
    proposal_weight_.resize(n_);
    refresh_caches();
}

void MwgSampler::compute_kernels(double lambda, double psi, double theta, std::vector<double>& out) const
{
    const KernelEvaluator kernel(lambda, psi, theta);
    for (std::size_t i = 0; i < n_; ++i)
        out[i] = kernel.value(spans_[i]);
}

double MwgSampler::weighted_sum(const std::vector<double>& weights, const std::vector<double>& kernels) const
{
    CompensatedSum sum;
    for (std::size_t i = 0; i < n_; ++i)
        sum += weights[i] * kernels[i];
    return sum.value();
}

double MwgSampler::sum_log_offsets(double psi) const
{
    CompensatedSum sum;
    for (double d : offsets_)
        sum += std::log(d + psi);
    return sum.value();
}

double MwgSampler::sum_count_delta() const
{
    CompensatedSum sum;
    for (std::size_t i = 0; i < n_; ++i)
        sum += counts_[i] * delta_[i];
    return sum.value();
}

void MwgSampler::refresh_caches()
{
    const auto& p = state_.params;
    for (std::size_t i = 0; i < n_; ++i)
    {
        delta_[i] = linear_predictor(x_[i], p.beta, p.kappa, state_.eps[i]);
        weight_[i] = std::exp(delta_[i]);
    }
    compute_kernels(p.lambda, p.psi, p.decay(), kernel_);
    weighted_kernel_sum_ = weighted_sum(weight_, kernel_);
    sum_log_offsets_ = sum_log_offsets(p.psi);
}

double MwgSampler::log_likelihood() const
{
    const auto& p = state_.params;
    double lambda_term = p.lambda == 0.0 ? 0.0 : -p.lambda * sum_log_offsets_;
    const double theta = p.decay();
    CompensatedSum ll;
    ll += -p.phi * weighted_kernel_sum_;
    if (total_count_ > 0.0)
        ll += total_count_ * std::log(p.phi);
    ll += sum_count_delta();
    ll += lambda_term;
    if (theta != 0.0)
        ll += -theta * sum_offsets_;
    return ll.value();
}

double MwgSampler::log_likelihood_under(Model model, double theta) const
{
    const auto& p = state_.params;
    const double decay = model == Model::Hybrid ? theta : 0.0;
    if (model == Model::Hybrid && !(theta > 0.0))
        return neg_inf;
    std::vector<double> kernels(n_);
    compute_kernels(p.lambda, p.psi, decay, kernels);
    CompensatedSum ll;
    ll += -p.phi * weighted_sum(weight_, kernels);
    if (total_count_ > 0.0)
        ll += total_count_ * std::log(p.phi);
    ll += sum_count_delta();
    if (p.lambda != 0.0)
        ll += -p.lambda * sum_log_offsets_;
    if (decay != 0.0)
        ll += -decay * sum_offsets_;
    return ll.value();
}

void MwgSampler::switch_model(Model model, double theta)
{
    state_.params.model = model;
    state_.params.theta = theta;
    if (model == Model::Hybrid && !(theta > 0.0))
        throw ValidationError("sampler: hybrid model requires theta > 0");
    compute_kernels(state_.params.lambda, state_.params.psi, state_.params.decay(), kernel_);
    weighted_kernel_sum_ = weighted_sum(weight_, kernel_);
}

void MwgSampler::set_inactive_theta(double theta)
{
    if (state_.params.model == Model::Hybrid)
        throw ValidationError("sampler: theta is active under the hybrid model");
    state_.params.theta = theta;
}

bool MwgSampler::accept(Rng& rng, double log_ratio) const
{
    if (std::isnan(log_ratio))
        return false;
    if (log_ratio >= 0.0)
        return true;
    return std::log(rng.uniform()) < log_ratio;
}

int MwgSampler::update_beta(Rng& rng)
{
    auto& p = state_.params;
    const double proposal = p.beta + scales_.beta * normal_(rng);
    const double shift = proposal - p.beta;
    for (std::size_t i = 0; i < n_; ++i)
        proposal_weight_[i] = std::exp(delta_[i] + shift * x_[i]);
    const double proposal_sum = weighted_sum(proposal_weight_, kernel_);
    const double log_ratio = -p.phi * (proposal_sum - weighted_kernel_sum_) + shift * sum_mx_ +
                             priors_.log_prior_beta(proposal) - priors_.log_prior_beta(p.beta);
    ++acceptance_.beta.proposed;
    if (!accept(rng, log_ratio))
        return 0;
    ++acceptance_.beta.accepted;
    p.beta = proposal;
    for (std::size_t i = 0; i < n_; ++i)
        delta_[i] += shift * x_[i];
    weight_.swap(proposal_weight_);
    weighted_kernel_sum_ = proposal_sum;
    return 1;
}

int MwgSampler::update_kappa(Rng& rng)
{
    auto& p = state_.params;
    const double proposal = p.kappa + scales_.kappa * normal_(rng);
    const double shift = proposal - p.kappa;
    for (std::size_t i = 0; i < n_; ++i)
        proposal_weight_[i] = std::exp(delta_[i] + shift * x2_[i]);
    const double proposal_sum = weighted_sum(proposal_weight_, kernel_);
    const double log_ratio = -p.phi * (proposal_sum - weighted_kernel_sum_) + shift * sum_mx2_ +
                             priors_.log_prior_kappa(proposal) - priors_.log_prior_kappa(p.kappa);
    ++acceptance_.kappa.proposed;
    if (!accept(rng, log_ratio))
        return 0;
    ++acceptance_.kappa.accepted;
    p.kappa = proposal;
    for (std::size_t i = 0; i < n_; ++i)
        delta_[i] += shift * x2_[i];
    weight_.swap(proposal_weight_);
    weighted_kernel_sum_ = proposal_sum;
    return 1;
}

int MwgSampler::update_lambda(Rng& rng)
{
    auto& p = state_.params;
    const double proposal = p.lambda + scales_.lambda * normal_(rng);
    ++acceptance_.lambda.proposed;
    if (!(proposal < 1.0))
        return 0;
    compute_kernels(proposal, p.psi, p.decay(), proposal_kernel_);
    const double proposal_sum = weighted_sum(weight_, proposal_kernel_);
    const double log_ratio = -p.phi * (proposal_sum - weighted_kernel_sum_) -
                             (proposal - p.lambda) * sum_log_offsets_ + priors_.log_prior_lambda(proposal) -
                             priors_.log_prior_lambda(p.lambda);
    if (!accept(rng, log_ratio))
        return 0;
    ++acceptance_.lambda.accepted;
    p.lambda = proposal;
    kernel_.swap(proposal_kernel_);
    weighted_kernel_sum_ = proposal_sum;
    return 1;
}

void MwgSampler::gibbs_phi(Rng& rng)
{
    state_.params.phi = draw_gamma(rng, phi_conditional_shape(), phi_conditional_rate());
}

int MwgSampler::update_psi(Rng& rng)
{
    auto& p = state_.params;
    const double proposal = p.psi + scales_.psi * normal_(rng);
    ++acceptance_.psi.proposed;
    if (!(proposal >= 0.0))
        return 0;
    compute_kernels(p.lambda, proposal, p.decay(), proposal_kernel_);
    const double proposal_sum = weighted_sum(weight_, proposal_kernel_);
    const double proposal_log_offsets = sum_log_offsets(proposal);
    const double lambda_change =
        p.lambda == 0.0 ? 0.0 : -p.lambda * (proposal_log_offsets - sum_log_offsets_);
    const double log_ratio = -p.phi * (proposal_sum - weighted_kernel_sum_) + lambda_change +
                             priors_.log_prior_psi(proposal) - priors_.log_prior_psi(p.psi);
    if (!accept(rng, log_ratio))
        return 0;
    ++acceptance_.psi.accepted;
    p.psi = proposal;
    kernel_.swap(proposal_kernel_);
    weighted_kernel_sum_ = proposal_sum;
    sum_log_offsets_ = proposal_log_offsets;
    return 1;
}

void MwgSampler::gibbs_tau(Rng& rng)
{
    state_.params.tau = draw_gamma(rng, tau_conditional_shape(), tau_conditional_rate());
}

double MwgSampler::update_eps(Rng& rng)
{
    const auto& p = state_.params;
    std::size_t accepted = 0;
    for (std::size_t i = 0; i < n_; ++i)
    {
        const double current = state_.eps[i];
        const double proposal = current + scales_.eps * normal_(rng);
        const double step = proposal - current;
        const double proposal_weight = weight_[i] * std::exp(step);
        const double log_ratio = -p.phi * kernel_[i] * (proposal_weight - weight_[i]) + counts_[i] * step -
                                 0.5 * p.tau * (proposal * proposal - current * current);
        if (accept(rng, log_ratio))
        {
            state_.eps[i] = proposal;
            delta_[i] += step;
            weight_[i] = proposal_weight;
            ++accepted;
        }
    }
    acceptance_.eps.proposed += n_;
    acceptance_.eps.accepted += accepted;
    // eps moved weights individually; rebuild the sum from scratch
    weighted_kernel_sum_ = weighted_sum(weight_, kernel_);
    return n_ == 0 ? -1.0 : static_cast<double>(accepted) / static_cast<double>(n_);
}

int MwgSampler::update_theta(Rng& rng)
{
    auto& p = state_.params;
    const double proposal = p.theta + scales_.theta * normal_(rng);
    ++acceptance_.theta.proposed;
    if (!(proposal > 0.0))
        return 0;
    compute_kernels(p.lambda, p.psi, proposal, proposal_kernel_);
    const double proposal_sum = weighted_sum(weight_, proposal_kernel_);
    const double log_ratio = -p.phi * (proposal_sum - weighted_kernel_sum_) - (proposal - p.theta) * sum_offsets_ +
                             priors_.log_prior_theta(proposal) - priors_.log_prior_theta(p.theta);
    if (!accept(rng, log_ratio))
        return 0;
    ++acceptance_.theta.accepted;
    p.theta = proposal;
    kernel_.swap(proposal_kernel_);
    weighted_kernel_sum_ = proposal_sum;
    return 1;
}

double MwgSampler::phi_conditional_shape() const { return priors_.a_phi + total_count_; }
double MwgSampler::phi_conditional_rate() const { return priors_.b_phi + weighted_kernel_sum_; }
double MwgSampler::tau_conditional_shape() const { return priors_.a_tau + 0.5 * static_cast<double>(n_); }
double MwgSampler::tau_conditional_rate() const
{
    CompensatedSum sum;
    for (double e : state_.eps)
        sum += e * e;
    return priors_.b_tau + 0.5 * sum.value();
}

void MwgSampler::sweep(Rng& rng)
{
    last_ = {};
    last_.beta = update_beta(rng);
    last_.kappa = update_kappa(rng);
    last_.lambda = update_lambda(rng);
    gibbs_phi(rng);
    last_.psi = update_psi(rng);
    gibbs_tau(rng);
    last_.eps_rate = update_eps(rng);
    if (state_.params.model == Model::Hybrid)
        last_.theta = update_theta(rng);
}

void MwgSampler::adapt(std::size_t iteration)
{
    const double gain = std::pow(static_cast<double>(iteration) + 1.0, -0.6);
    auto step = [&](double& scale, double outcome) {
        if (outcome < 0.0)
            return;
        scale *= std::exp(gain * (outcome - target_acceptance));
    };
    step(scales_.beta, last_.beta);
    step(scales_.kappa, last_.kappa);
    step(scales_.lambda, last_.lambda);
    step(scales_.psi, last_.psi);
    step(scales_.theta, last_.theta);
    step(scales_.eps, last_.eps_rate);
}

// --- drivers ----------------------------------------------------------------

SamplerState initial_state(Model model, const EventCascade& cascade, const Covariates& covariates)
{
    cascade.validate();
    if (covariates.x.size() != cascade.size())
        throw ValidationError("initial_state: covariates must have one entry per original");
    SamplerState state;
    state.params.model = model;
    state.params.beta = 0.0;
    state.params.kappa = 0.0;
    state.params.lambda = 0.5;
    state.params.psi = 1.0;
    state.params.tau = 1.0;
    state.params.theta = model == Model::Hybrid ? (cascade.horizon > 0.0 ? 1.0 / cascade.horizon : 1.0) : 0.0;
    const std::size_t n = cascade.size();
    const KernelEvaluator kernel(state.params.lambda, state.params.psi, state.params.decay());
    std::vector<double> kernels(n);
    CompensatedSum total;
    for (std::size_t i = 0; i < n; ++i)
    {
        kernels[i] = kernel.value(cascade.horizon - cascade.original_times[i]);
        total += kernels[i];
    }
    const double m = static_cast<double>(cascade.total_retweets());
    const double phi0 = total.value() > 0.0 ? std::max(m, 1.0) / total.value() : 1.0;

    // smoothed log residuals; starting at eps = 0 sends the first tau draw to
    // about n / (2 b_tau) and the chain needs a long time to recover
    state.eps.resize(n);
    CompensatedSum weighted;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double mi = static_cast<double>(cascade.retweet_times[i].size());
        state.eps[i] = std::log((mi + 0.5) / (phi0 * kernels[i] + 0.5));
        weighted += std::exp(state.eps[i]) * kernels[i];
    }
    state.params.phi = weighted.value() > 0.0 ? std::max(m, 1.0) / weighted.value() : 1.0;
    return state;
}

SamplerState mwg_sweep(const SamplerState& state, const EventCascade& cascade, const Covariates& covariates,
                       const PriorSpec& priors, const ProposalScales& scales, Rng& rng)
{
    MwgSampler sampler(cascade, covariates, priors, state, scales);
    sampler.sweep(rng);
    return sampler.state();
}

Chain run_chain(Model model, const EventCascade& cascade, const Covariates& covariates, const PriorSpec& priors,
                const McmcConfig& config, std::optional<SamplerState> start)
{
    config.validate();
    SamplerState init = start ? std::move(*start) : initial_state(model, cascade, covariates);
    if (init.params.model != model)
        throw ValidationError("run_chain: starting state belongs to the other model");
    MwgSampler sampler(cascade, covariates, priors, std::move(init), config.scales);
    if (!std::isfinite(sampler.log_likelihood()))
        throw NumericalError("run_chain: log-likelihood is not finite at the starting point");

    Rng rng = Rng::substream(config.seed, stream_key("mwg"), static_cast<std::uint64_t>(model));
    std::size_t sweeps = 0;
    auto step = [&](bool adapting) {
        sampler.sweep(rng);
        if (adapting)
            sampler.adapt(sweeps);
        ++sweeps;
    };
    return detail::drive_chain(Algorithm::Single, sampler, config, step);
}

} // namespace hnhpp
