#include "hnhpp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hnhpp/errors.hpp"

namespace hnhpp {

namespace {

constexpr int max_inversion_steps = 200;

/// Span L with K(L) = k for theta = 0.
double invert_power_law(double k, double lambda, double psi)
{
    const double a = 1.0 - lambda;
    if (psi == 0.0)
        return std::exp(std::log(a * k) / a);
    // L = psi ((1 + a k psi^-a)^(1/a) - 1)
    const double z = a * k * std::exp(-a * std::log(psi));
    return psi * std::expm1(std::log1p(z) / a);
}

/// Span L in [0, span_max] with K(L) = k for theta > 0.
double invert_hybrid(double k, const KernelEvaluator& kernel, double lambda, double psi, double theta,
                     double span_max, double tolerance)
{
    auto f = [&](double L) { return kernel.value(L) - k; };
    auto slope = [&](double L) { return std::exp(-lambda * std::log(L + psi) - theta * L); };

    double lo = 0.0;
    double hi = span_max;
    double L = 0.5 * span_max;
    double dx_old = span_max;
    double dx = dx_old;
    double fL = f(L);
    for (int step = 0; step < max_inversion_steps; ++step)
    {
        if (fL == 0.0)
            return L;
        if (fL < 0.0)
            lo = L;
        else
            hi = L;
        const double d = slope(L);
        const double newton = L - fL / d;
        // fall back to bisection when Newton leaves the bracket or stalls
        if (!(newton > lo && newton < hi) || std::fabs(2.0 * fL) > std::fabs(dx_old * d))
        {
            dx_old = dx;
            dx = 0.5 * (hi - lo);
            L = lo + dx;
        }
        else
        {
            dx_old = dx;
            dx = L - newton;
            L = newton;
        }
        if (std::fabs(dx) <= 4.0 * std::numeric_limits<double>::epsilon() * (L + psi) || hi - lo <= 0.0)
            return L;
        fL = f(L);
    }
    if (hi - lo > tolerance)
        throw NumericalError("invert_cumulative_intensity: no convergence within 200 steps");
    return L;
}

} // namespace

LatentEffects draw_random_effects(std::size_t n, double tau, Rng& rng)
{
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw ValidationError("draw_random_effects: tau must be positive and finite");
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(tau));
    LatentEffects out;
    out.eps.resize(n);
    for (auto& e : out.eps)
        e = normal(rng);
    return out;
}

double invert_cumulative_intensity(double target, double s, double delta, const ScalarParams& params,
                                   double horizon)
{
    params.validate();
    if (s > horizon)
        throw ValidationError("invert_cumulative_intensity: s exceeds the horizon");
    if (!(target >= 0.0))
        throw ValidationError("invert_cumulative_intensity: target must be non-negative");
    if (target == 0.0)
        return s;
    const double span_max = horizon - s;
    const double k = target / (params.phi * std::exp(delta));
    const double theta = params.decay();
    double L;
    if (theta == 0.0)
    {
        L = invert_power_law(k, params.lambda, params.psi);
    }
    else
    {
        const KernelEvaluator kernel(params.lambda, params.psi, theta);
        L = invert_hybrid(k, kernel, params.lambda, params.psi, theta, span_max, 1e-9 * std::max(horizon, 1.0));
    }
    return s + std::clamp(L, 0.0, span_max);
}

std::vector<double> simulate_retweets(double s, double x, double eps, const ScalarParams& params, double horizon,
                                      Rng& rng)
{
    params.validate();
    if (s > horizon)
        throw ValidationError("simulate_retweets: s exceeds the horizon");
    const double span_max = horizon - s;
    const double c = params.phi * std::exp(linear_predictor(x, params.beta, params.kappa, eps));
    const double theta = params.decay();
    const KernelEvaluator kernel(params.lambda, params.psi, theta);
    const double k_max = kernel.value(span_max);
    const double total = c * k_max;

    std::vector<double> times;
    if (!(total > 0.0))
        return times;
    std::exponential_distribution<double> unit(1.0);
    const double tolerance = 1e-9 * std::max(horizon, 1.0);
    double arrival = unit(rng);
    while (arrival <= total)
    {
        const double k = std::min(arrival / c, k_max);
        double L = theta == 0.0 ? invert_power_law(k, params.lambda, params.psi)
                                : invert_hybrid(k, kernel, params.lambda, params.psi, theta, span_max, tolerance);
        L = std::clamp(L, 0.0, span_max);
        double t = s + L;
        if (!times.empty())
            t = std::max(t, times.back());
        times.push_back(std::min(t, horizon));
        arrival += unit(rng);
    }
    return times;
}

SimulatedCascade simulate_cascade(std::span<const double> original_times, std::span<const std::int64_t> followers,
                                  const ScalarParams& params, double horizon, std::uint64_t seed)
{
    params.validate();
    if (original_times.size() != followers.size())
        throw ValidationError("simulate_cascade: times and follower counts differ in length");
    const std::size_t n = original_times.size();

    SimulatedCascade out;
    out.covariates = n == 0 ? Covariates{} : center_covariates(followers);
    Rng effects_rng = Rng::substream(seed, stream_key("random-effects"));
    out.eps = draw_random_effects(n, params.tau, effects_rng);

    auto& cascade = out.cascade;
    cascade.horizon = horizon;
    cascade.original_times.assign(original_times.begin(), original_times.end());
    cascade.follower_counts.assign(followers.begin(), followers.end());
    cascade.retweet_times.resize(n);
    const std::uint64_t key = stream_key("retweets");
    for (std::size_t i = 0; i < n; ++i)
    {
        Rng rng = Rng::substream(seed, key, i);
        cascade.retweet_times[i] =
            simulate_retweets(original_times[i], out.covariates.x[i], out.eps.eps[i], params, horizon, rng);
    }
    cascade.validate();
    return out;
}

std::vector<std::int64_t> sample_followers(std::size_t n, double alpha, std::int64_t x_min, Rng& rng)
{
    if (!(alpha > 1.0) || !std::isfinite(alpha))
        throw ValidationError("sample_followers: alpha must exceed 1");
    if (x_min < 1)
        throw ValidationError("sample_followers: x_min must be at least 1");
    const double limit = static_cast<double>(std::numeric_limits<std::int64_t>::max());
    std::vector<std::int64_t> out(n);
    for (auto& v : out)
    {
        const double draw = std::floor(static_cast<double>(x_min) * std::pow(rng.uniform(), -1.0 / (alpha - 1.0)));
        v = draw >= limit ? std::numeric_limits<std::int64_t>::max() : static_cast<std::int64_t>(draw);
    }
    return out;
}

} // namespace hnhpp
