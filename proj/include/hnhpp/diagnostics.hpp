#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hnhpp/model.hpp"
#include "hnhpp/rng.hpp"
#include "hnhpp/sampler.hpp"

namespace hnhpp {

struct DiscrepancyPair
{
    double chi_sq_actual = 0.0;
    double chi_sq_simulated = 0.0;
    std::size_t draw_index = 0;
};

/// H_i(T) with eps_i = 0 for every original.
std::vector<double> base_cumulative_intensities(const EventCascade& cascade, const Covariates& covariates,
                                                const ScalarParams& params);

/**
 * chi^2 = sum_i (m_i / H_i - e^(0.5/tau))^2 / (e^(2/tau) - e^(1/tau)), where H_i
 * is the cumulative intensity at eps_i = 0 and e^(0.5/tau), e^(2/tau) - e^(1/tau)
 * are the mean and variance of the lognormal factor e^eps_i.
 * Throws ValidationError if tau <= 0, the lengths differ or any H_i is not positive.
 */
double chi_square_discrepancy(std::span<const double> counts, std::span<const double> base_means, double tau);

double chi_square_discrepancy(std::span<const double> counts, const EventCascade& cascade,
                              const Covariates& covariates, const ScalarParams& params);

/// Observed retweet counts m_i as doubles.
std::vector<double> observed_counts(const EventCascade& cascade);

/// Poisson(H_i(T; eps_i)) draws, one per original.
std::vector<std::int64_t> simulate_counts(const EventCascade& cascade, const Covariates& covariates,
                                          const ScalarParams& params, std::span<const double> eps, Rng& rng);

struct PredictiveCheck
{
    double p_value = 0.0;
    std::vector<DiscrepancyPair> pairs;
};

/**
 * Posterior-predictive p-value over the draws of `chain` that carry eps
 * records. Each simulated count uses its own substream keyed by the seed, the
 * draw index and the original's (time, follower count), so the result does not
 * depend on the order of the originals.
 */
PredictiveCheck posterior_predictive_p(const Chain& chain, const EventCascade& cascade,
                                       const Covariates& covariates, std::uint64_t seed);

struct PredictionInterval
{
    std::size_t original = 0;
    std::int64_t observed = 0;
    double mean = 0.0;
    std::int64_t lower = 0;
    std::int64_t upper = 0;
    bool widest_for_count = false;  // widest interval among originals sharing `observed`
};

/**
 * Equal-tailed predictive intervals of the retweet counts at the given level,
 * from the draws with eps records (inverse empirical CDF, lower rounding).
 * Throws ValidationError for fewer than 100 such draws.
 */
std::vector<PredictionInterval> prediction_intervals(const Chain& chain, const EventCascade& cascade,
                                                     const Covariates& covariates, double level,
                                                     std::uint64_t seed);

/// Fraction of originals whose observed count lies inside its interval.
double interval_coverage(std::span<const PredictionInterval> intervals);

} // namespace hnhpp
