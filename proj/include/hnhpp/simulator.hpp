#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hnhpp/model.hpp"
#include "hnhpp/rng.hpp"

namespace hnhpp {

/// n independent N(0, 1/tau) draws. Throws ValidationError if tau <= 0.
LatentEffects draw_random_effects(std::size_t n, double tau, Rng& rng);

/**
 * Time t in [s, s + span_max] with H(t) = target, where H(t) = c K(t - s) and
 * c = phi e^delta. Closed form when theta = 0; otherwise a safeguarded
 * Newton-bisection iteration on the monotone H (at most 200 steps).
 */
double invert_cumulative_intensity(double target, double s, double delta, const ScalarParams& params,
                                   double horizon);

/**
 * Retweet times of one original by time rescaling: unit-rate Poisson arrivals
 * E_1 < E_2 < ... up to H(T) are mapped through H^-1. Sorted, within [s, T].
 */
std::vector<double> simulate_retweets(double s, double x, double eps, const ScalarParams& params, double horizon,
                                      Rng& rng);

struct SimulatedCascade
{
    EventCascade cascade;
    Covariates covariates;
    LatentEffects eps;
};

/**
 * Synthetic cascade on the given originals. Covariates are centred from the
 * follower counts; eps comes from one substream and each original's retweets
 * from its own substream, so the output depends only on (inputs, seed).
 */
SimulatedCascade simulate_cascade(std::span<const double> original_times, std::span<const std::int64_t> followers,
                                  const ScalarParams& params, double horizon, std::uint64_t seed);

/// floor(x_min U^(-1/(alpha-1))): a Pareto(alpha, x_min) draw rounded down.
std::vector<std::int64_t> sample_followers(std::size_t n, double alpha, std::int64_t x_min, Rng& rng);

} // namespace hnhpp
