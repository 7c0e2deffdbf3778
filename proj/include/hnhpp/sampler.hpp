#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "hnhpp/model.hpp"
#include "hnhpp/rng.hpp"

namespace hnhpp {

/**
 * Independent priors on the scalar parameters:
 *   beta ~ N(mu_beta, 1/tau_beta), kappa ~ N(mu_kappa, 1/tau_kappa),
 *   1 - lambda ~ Gamma(a_lambda, b_lambda), phi ~ Gamma(a_phi, b_phi),
 *   psi ~ Gamma(a_psi, b_psi), tau ~ Gamma(a_tau, b_tau),
 *   theta ~ Gamma(a_theta, b_theta) under the hybrid model.
 * Gamma(a, b) has shape a and rate b. The defaults are vague: precision 1e-4
 * for the normals, Gamma(1, 0.001) for the rest.
 */
struct PriorSpec
{
    double mu_beta = 0.0;
    double tau_beta = 1e-4;
    double mu_kappa = 0.0;
    double tau_kappa = 1e-4;
    double a_lambda = 1.0;
    double b_lambda = 0.001;
    double a_phi = 1.0;
    double b_phi = 0.001;
    double a_psi = 1.0;
    double b_psi = 0.001;
    double a_tau = 1.0;
    double b_tau = 0.001;
    double a_theta = 1.0;
    double b_theta = 0.001;

    void validate() const;

    // normalised log densities; -inf outside the support
    double log_prior_beta(double beta) const;
    double log_prior_kappa(double kappa) const;
    double log_prior_lambda(double lambda) const;
    double log_prior_psi(double psi) const;
    double log_prior_theta(double theta) const;
};

/// Gamma(shape, rate) density standing in for theta while the power-law model is active.
struct PseudopriorSpec
{
    double shape = 1.0;
    double rate = 1.0;

    void validate() const;
    double log_density(double theta) const;
};

/// Random-walk standard deviations, one per Metropolis-updated quantity.
/// All eps_i share one scale.
struct ProposalScales
{
    double beta = 0.05;
    double kappa = 0.02;
    double lambda = 0.02;
    double psi = 1.0;
    double theta = 1e-5;
    double eps = 0.5;
};

struct McmcConfig
{
    std::size_t burn_in = 1000;
    std::size_t thinning = 1;
    std::size_t kept_length = 1000;
    ProposalScales scales;
    double prior_model_prob_0 = 0.5;
    std::uint64_t seed = 1;
    bool adapt_during_burn_in = true;
    /// store the eps vector on every eps_every-th kept draw
    std::size_t eps_every = 10;

    void validate() const;
};

/// Parameters plus random effects: the full state of one chain.
struct SamplerState
{
    ScalarParams params;
    std::vector<double> eps;
};

struct UpdateCounter
{
    std::size_t proposed = 0;
    std::size_t accepted = 0;

    double rate() const { return proposed == 0 ? 0.0 : static_cast<double>(accepted) / proposed; }
};

struct AcceptanceStats
{
    UpdateCounter beta;
    UpdateCounter kappa;
    UpdateCounter lambda;
    UpdateCounter psi;
    UpdateCounter theta;
    UpdateCounter eps;
    UpdateCounter model_jump;  // GVS switches / RJMCMC jump proposals
};

enum class Algorithm
{
    Single,  // fixed model
    Gvs,
    Rjmcmc,
};

/// One stored draw. theta is NaN when the record has no theta value (power-law
/// model outside GVS); under GVS the pseudoprior draw is kept while M = 0.
struct Draw
{
    Model model = Model::PowerLaw;
    double beta = 0.0;
    double kappa = 0.0;
    double lambda = 0.0;
    double phi = 0.0;
    double psi = 0.0;
    double tau = 0.0;
    double theta = 0.0;
    double log_likelihood = 0.0;

    ScalarParams params() const;
};

struct EpsRecord
{
    std::size_t draw_index = 0;
    std::vector<double> eps;
};

struct Chain
{
    Algorithm algorithm = Algorithm::Single;
    double prior_model_prob_0 = 0.5;
    std::vector<Draw> draws;
    std::vector<EpsRecord> eps_records;
    AcceptanceStats acceptance;
    ProposalScales final_scales;
    SamplerState final_state;
    double wall_seconds = 0.0;
};

/**
 * Component-wise Metropolis-within-Gibbs sampler for one model.
 *
 * A sweep updates, in order: beta, kappa, lambda (random walk), phi (Gibbs),
 * psi (random walk), tau (Gibbs), every eps_i (random walk on its own factor
 * exp[-H_i + m_i eps_i] times its normal prior) and, under the hybrid model,
 * theta (random walk). Per-original kernels and likelihood sums are cached so a
 * proposal costs one pass over the originals.
 */
class MwgSampler
{
  public:
    MwgSampler(const EventCascade& cascade, const Covariates& covariates, const PriorSpec& priors,
               SamplerState initial, ProposalScales scales);

    void sweep(Rng& rng);

    /// Robbins-Monro step of each log proposal scale toward 0.44 acceptance,
    /// using the outcomes of the last sweep. iteration counts from 0.
    void adapt(std::size_t iteration);

    const SamplerState& state() const { return state_; }
    const ProposalScales& scales() const { return scales_; }
    const AcceptanceStats& acceptance() const { return acceptance_; }
    void reset_acceptance() { acceptance_ = {}; }

    /// Log-likelihood of the current state under its own model.
    double log_likelihood() const;

    /// Log-likelihood at the current (eta, eps) with the model and theta replaced.
    double log_likelihood_under(Model model, double theta) const;

    /// Moves the chain to another model; theta is the hybrid decay (kept as an
    /// inactive value when switching to the power-law model).
    void switch_model(Model model, double theta);

    /// Overwrites the stored (inactive) theta while in the power-law model.
    void set_inactive_theta(double theta);

    double horizon() const { return horizon_; }

    // exposed for the conjugacy checks: the Gibbs full conditionals of phi and tau
    double phi_conditional_shape() const;
    double phi_conditional_rate() const;
    double tau_conditional_shape() const;
    double tau_conditional_rate() const;

    /// The Gibbs steps of a sweep on their own.
    void gibbs_phi(Rng& rng);
    void gibbs_tau(Rng& rng);

  private:
    struct SweepOutcome
    {
        int beta = -1, kappa = -1, lambda = -1, psi = -1, theta = -1;  // -1 not run, 0/1 otherwise
        double eps_rate = -1.0;
    };

    // data
    std::size_t n_;
    double horizon_;
    std::vector<double> x_;
    std::vector<double> x2_;
    std::vector<double> spans_;  // T - s_i
    std::vector<double> counts_;
    std::vector<std::size_t> offsets_begin_;
    std::vector<double> offsets_;  // t_ij - s_i, flattened
    double total_count_ = 0.0;
    double sum_mx_ = 0.0;
    double sum_mx2_ = 0.0;
    double sum_offsets_ = 0.0;

    PriorSpec priors_;
    SamplerState state_;
    ProposalScales scales_;
    AcceptanceStats acceptance_;
    SweepOutcome last_;

    // caches for the current state
    std::vector<double> delta_;
    std::vector<double> weight_;  // exp(delta_i)
    std::vector<double> kernel_;  // K_i(T - s_i)
    double weighted_kernel_sum_ = 0.0;
    double sum_log_offsets_ = 0.0;  // sum_ij log(t_ij - s_i + psi)

    // scratch
    std::vector<double> proposal_kernel_;
    std::vector<double> proposal_weight_;
    std::normal_distribution<double> normal_{0.0, 1.0};

    void refresh_caches();
    void compute_kernels(double lambda, double psi, double theta, std::vector<double>& out) const;
    double weighted_sum(const std::vector<double>& weights, const std::vector<double>& kernels) const;
    double sum_log_offsets(double psi) const;
    double sum_count_delta() const;

    bool accept(Rng& rng, double log_ratio) const;
    int update_beta(Rng& rng);
    int update_kappa(Rng& rng);
    int update_lambda(Rng& rng);
    int update_psi(Rng& rng);
    double update_eps(Rng& rng);
    int update_theta(Rng& rng);
};

/// Starting point: beta = kappa = 0, lambda = 0.5, psi = 1, tau = 1,
/// theta = 1/T for the hybrid model, eps_i = log[(m_i + 1/2) / (phi0 K_i + 1/2)]
/// with phi0 = max(m, 1) / sum_i K_i, and phi = max(m, 1) / sum_i e^eps_i K_i.
SamplerState initial_state(Model model, const EventCascade& cascade, const Covariates& covariates);

/// One sweep from `state`, returning the updated state.
SamplerState mwg_sweep(const SamplerState& state, const EventCascade& cascade, const Covariates& covariates,
                       const PriorSpec& priors, const ProposalScales& scales, Rng& rng);

/**
 * Runs burn_in sweeps (adapting proposal scales if configured, then freezing
 * them) followed by kept_length * thinning sweeps, storing every thinning-th
 * state. A fixed seed gives a bit-identical chain. Throws NumericalError if the
 * starting log-likelihood is not finite.
 */
Chain run_chain(Model model, const EventCascade& cascade, const Covariates& covariates, const PriorSpec& priors,
                const McmcConfig& config, std::optional<SamplerState> start = std::nullopt);

/// Method-of-moments gamma fit to the theta draws of a hybrid-model pilot chain.
PseudopriorSpec fit_pseudoprior(const Chain& pilot);
PseudopriorSpec fit_pseudoprior(const std::vector<double>& theta_draws);

/**
 * Gibbs variable selection over M. Each iteration runs an MWG sweep in the
 * current model, draws theta from the pseudoprior when M = 0, then draws M
 * from its full conditional with weights
 *   A_0 = f(. | eta_0, M=0) pi~(theta | M=0) pi(M=0),
 *   A_1 = f(. | eta_1, M=1) pi(theta | M=1) pi(M=1),
 * formed in log space.
 */
Chain gvs_run(const EventCascade& cascade, const Covariates& covariates, const PriorSpec& priors,
              const PseudopriorSpec& pseudoprior, const McmcConfig& config,
              std::optional<SamplerState> start = std::nullopt);

struct JumpProbabilities
{
    double p01 = 0.5;  // propose 0 -> 1
    double p10 = 0.5;  // propose 1 -> 0

    void validate() const;
};

/**
 * Reversible-jump MCMC between the two models. With probability p(M, M) an MWG
 * sweep is made in the current model; otherwise a jump is proposed (0 -> 1
 * draws theta from the pseudoprior, 1 -> 0 drops theta) and accepted with the
 * likelihood ratio times theta prior/pseudoprior ratio, model prior ratio and
 * jump probability ratio.
 */
Chain rjmcmc_run(const EventCascade& cascade, const Covariates& covariates, const PriorSpec& priors,
                 const PseudopriorSpec& pseudoprior, const McmcConfig& config, const JumpProbabilities& jumps = {},
                 std::optional<SamplerState> start = std::nullopt);

struct BayesFactor
{
    enum class Kind
    {
        Estimate,
        LowerBound,  // the chain never visited M = 0
        UpperBound,  // the chain never visited M = 1
    };

    double value = 0.0;
    std::size_t count_0 = 0;
    std::size_t count_1 = 0;
    Kind kind = Kind::Estimate;
};

/// B_10 = [#{M=1} / #{M=0}] / [pi(M=1) / pi(M=0)].
BayesFactor bayes_factor(std::size_t count_0, std::size_t count_1, double prior_model_prob_0);
BayesFactor bayes_factor(const Chain& chain, double prior_model_prob_0);

/**
 * Recipe for choosing an artificial pi(M=0) so that a model-selection chain
 * visits both models: run short GVS probes, estimate B_10 from each with a
 * half-count continuity correction, and set the prior odds to 1/B_10 until both
 * models take at least `min_share` of the probe draws.
 */
double rebalance_model_prior(const EventCascade& cascade, const Covariates& covariates, const PriorSpec& priors,
                             const PseudopriorSpec& pseudoprior, const McmcConfig& probe,
                             std::optional<SamplerState> start = std::nullopt, int max_rounds = 20,
                             double min_share = 0.2);

} // namespace hnhpp
