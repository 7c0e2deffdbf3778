#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace hnhpp {

/// Single hybrid process h(t) = gamma t^-lambda e^(-theta t); theta = 0 gives
/// the power-law process.
struct ClassicalParams
{
    double lambda = 0.0;
    double gamma = 1.0;
    double theta = 0.0;

    void validate() const;
};

struct FitResult
{
    ClassicalParams params;
    double log_likelihood = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
};

/// log f(t_1..t_n | lambda, theta, gamma) for sorted times in [0, T].
double single_process_log_likelihood(std::span<const double> times, double horizon, const ClassicalParams& params);

/**
 * Power-law process MLE. gamma is profiled out, gamma(lambda) = n (1 - lambda) / T^(1 - lambda),
 * and lambda found by golden-section search on the concave profile. The lower
 * end of the bracket starts at -50 and is pushed further down while the
 * optimum sits on it.
 */
FitResult fit_power_law_mle(std::span<const double> times, double horizon);

/**
 * Hybrid process MLE over (lambda, theta, gamma) by Nelder-Mead on
 * (lambda, log theta, log gamma), started from the power-law fit. theta is
 * reported as 0 when the optimum runs to the boundary; the returned
 * log-likelihood is never below the power-law fit's.
 */
FitResult fit_hybrid_mle(std::span<const double> times, double horizon);

struct DuanePoint
{
    double log_time;
    double log_mtbf;  // log(t_i / i)
};

/// (log t_i, log(t_i / i)) for strictly positive, sorted times.
std::vector<DuanePoint> duane_points(std::span<const double> times);

/// Slope lambda and intercept log(1 - lambda) - log(gamma) of the power-law line.
std::pair<double, double> duane_reference_line(const ClassicalParams& params);

} // namespace hnhpp
