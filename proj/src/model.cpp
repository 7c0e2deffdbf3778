#include "hnhpp/model.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hnhpp/errors.hpp"
#include "hnhpp/incomplete_gamma.hpp"
#include "hnhpp/numeric.hpp"

namespace hnhpp {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// Relative span below which the hybrid kernel is integrated directly.
constexpr double short_span_ratio = 0.1;

struct GaussLegendre
{
    static constexpr int order = 20;
    std::array<double, order> nodes{};    // on [-1, 1]
    std::array<double, order> weights{};

    GaussLegendre()
    {
        for (int i = 0; i < order; ++i)
        {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it)
            {
                double p0 = 1.0;
                double p1 = 0.0;
                for (int j = 0; j < order; ++j)
                {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
                }
                dp = order * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::fabs(dz) < 1e-16)
                    break;
            }
            nodes[i] = z;
            weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
};

const GaussLegendre& gauss_legendre()
{
    static const GaussLegendre rule;
    return rule;
}

std::string describe(double v) { return std::to_string(v); }

} // namespace

std::string_view to_string(Model model)
{
    return model == Model::PowerLaw ? "power-law" : "hybrid";
}

std::size_t EventCascade::total_retweets() const
{
    std::size_t m = 0;
    for (const auto& times : retweet_times)
        m += times.size();
    return m;
}

std::size_t EventCascade::retweeted_originals() const
{
    std::size_t count = 0;
    for (const auto& times : retweet_times)
        count += times.empty() ? 0 : 1;
    return count;
}

void EventCascade::validate() const
{
    const std::size_t n = original_times.size();
    if (follower_counts.size() != n || retweet_times.size() != n)
        throw ValidationError("cascade: original_times, follower_counts and retweet_times must have equal length");
    if (!std::isfinite(horizon) || horizon < 0.0)
        throw ValidationError("cascade: horizon must be finite and non-negative");
    for (std::size_t i = 0; i < n; ++i)
    {
        const double s = original_times[i];
        if (!(s >= 0.0 && s <= horizon))
            throw ValidationError("cascade: original " + std::to_string(i) + " time " + describe(s) +
                                  " outside [0, T]");
        if (follower_counts[i] < 0)
            throw ValidationError("cascade: original " + std::to_string(i) + " has a negative follower count");
        double previous = s;
        for (double t : retweet_times[i])
        {
            if (!(t >= previous))
                throw ValidationError("cascade: retweet times of original " + std::to_string(i) +
                                      " must be sorted and not precede the original");
            if (!(t <= horizon))
                throw ValidationError("cascade: retweet of original " + std::to_string(i) + " at " +
                                      describe(t) + " is after the horizon");
            previous = t;
        }
    }
}

void ScalarParams::validate() const
{
    if (!(lambda < 1.0) || !std::isfinite(lambda))
        throw ValidationError("params: lambda must be finite and < 1, got " + describe(lambda));
    if (!(phi > 0.0) || !std::isfinite(phi))
        throw ValidationError("params: phi must be positive, got " + describe(phi));
    if (!(psi >= 0.0) || !std::isfinite(psi))
        throw ValidationError("params: psi must be non-negative, got " + describe(psi));
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw ValidationError("params: tau must be positive, got " + describe(tau));
    if (!std::isfinite(beta) || !std::isfinite(kappa))
        throw ValidationError("params: beta and kappa must be finite");
    if (model == Model::Hybrid && (!(theta > 0.0) || !std::isfinite(theta)))
        throw ValidationError("params: theta must be positive under the hybrid model, got " + describe(theta));
}

Covariates center_covariates(std::span<const std::int64_t> follower_counts)
{
    if (follower_counts.empty())
        throw ValidationError("center_covariates: empty follower count sequence");
    Covariates out;
    out.x.reserve(follower_counts.size());
    CompensatedSum total;
    for (auto count : follower_counts)
    {
        if (count < 0)
            throw ValidationError("center_covariates: negative follower count");
        const double v = std::log1p(static_cast<double>(count));
        out.x.push_back(v);
        total += v;
    }
    const double mean = total.value() / static_cast<double>(follower_counts.size());
    for (auto& v : out.x)
        v -= mean;
    return out;
}

double intensity(double t, double s, double delta, const ScalarParams& params)
{
    params.validate();
    if (t < s)
        return 0.0;
    const double u = t - s + params.psi;
    double shape;
    if (u == 0.0)
    {
        if (params.lambda > 0.0)
            throw DegenerateDataError("intensity is infinite at t = s when psi = 0 and lambda > 0");
        shape = params.lambda == 0.0 ? 1.0 : 0.0;
    }
    else
    {
        shape = std::pow(u, -params.lambda);
    }
    return params.phi * std::exp(delta) * shape * std::exp(-params.decay() * (t - s));
}

KernelEvaluator::KernelEvaluator(double lambda, double psi, double theta)
    : lambda_(lambda), psi_(psi), theta_(theta), a_(1.0 - lambda), log_a_(std::log(1.0 - lambda)),
      log_psi_(psi > 0.0 ? std::log(psi) : neg_inf)
{
    if (!(lambda < 1.0) || !(psi >= 0.0) || !(theta >= 0.0))
        throw ValidationError("kernel: requires lambda < 1, psi >= 0, theta >= 0");
    if (theta_ > 0.0)
    {
        log_theta_ = std::log(theta_);
        const double x0 = theta_ * psi_;
        log_full_ = std::lgamma(a_) - a_ * log_theta_ + x0;
        if (psi_ == 0.0)
        {
            log_lower_at_psi_ = neg_inf;
            psi_in_series_region_ = true;
        }
        else if (x0 < a_ + 1.0)
        {
            log_lower_at_psi_ = a_ * log_psi_ + std::log(detail::gamma_series(a_, x0));
            psi_in_series_region_ = true;
        }
        else
        {
            log_upper_at_psi_ = a_ * log_psi_ + std::log(detail::gamma_continued_fraction(a_, x0));
            psi_in_series_region_ = false;
        }
    }
}

double KernelEvaluator::log_value(double span) const
{
    if (!(span > 0.0))
        return neg_inf;
    if (theta_ > 0.0)
        return log_value_hybrid(span);
    const double log_u1 = std::log(psi_ + span);
    if (psi_ == 0.0)
        return a_ * log_u1 - log_a_;
    // (u1^a - psi^a)/a written so that L << psi and a -> 0 keep full precision
    return a_ * log_u1 + std::log(-std::expm1(-a_ * std::log1p(span / psi_))) - log_a_;
}

double KernelEvaluator::value(double span) const { return std::exp(log_value(span)); }

double KernelEvaluator::log_value_hybrid(double span) const
{
    if (psi_ > 0.0 && span < short_span_ratio * psi_ && theta_ * span < 2.0)
        return log_value_quadrature(span);

    const double u1 = psi_ + span;
    const double x1 = theta_ * u1;
    // every endpoint term carries the common factor u^a e^(-theta (u - psi))
    const double log_common = a_ * std::log(u1) - theta_ * span;
    if (x1 < a_ + 1.0)
    {
        const double log_lower1 = log_common + std::log(detail::gamma_series(a_, x1));
        return log_diff_exp(log_lower1, log_lower_at_psi_);
    }
    const double log_upper1 = log_common + std::log(detail::gamma_continued_fraction(a_, x1));
    if (!psi_in_series_region_)
        return log_diff_exp(log_upper_at_psi_, log_upper1);
    const double remainder = std::exp(log_upper1 - log_full_) + std::exp(log_lower_at_psi_ - log_full_);
    if (!(remainder < 1.0))
        return log_value_quadrature(span);
    return log_full_ + std::log1p(-remainder);
}

double KernelEvaluator::log_value_quadrature(double span) const
{
    // psi^-lambda int_0^L exp(-lambda log1p(v/psi) - theta v) dv, smooth on [0, L]
    const auto& gl = gauss_legendre();
    const double half = 0.5 * span;
    CompensatedSum sum;
    for (int k = 0; k < GaussLegendre::order; ++k)
    {
        const double v = half * (gl.nodes[k] + 1.0);
        sum += gl.weights[k] * std::exp(-lambda_ * std::log1p(v / psi_) - theta_ * v);
    }
    return -lambda_ * log_psi_ + std::log(half * sum.value());
}

double log_kernel_integral(double span, double lambda, double psi, double theta)
{
    return KernelEvaluator(lambda, psi, theta).log_value(span);
}

double cumulative_intensity(double horizon, double s, double delta, const ScalarParams& params)
{
    if (s > horizon)
        throw ValidationError("cumulative_intensity: original time " + describe(s) + " exceeds horizon " +
                              describe(horizon));
    params.validate();
    const KernelEvaluator kernel(params.lambda, params.psi, params.decay());
    const double log_k = kernel.log_value(horizon - s);
    if (log_k == neg_inf)
        return 0.0;
    return std::exp(std::log(params.phi) + delta + log_k);
}

double log_likelihood(const EventCascade& cascade, const Covariates& covariates, const LatentEffects& eps,
                      const ScalarParams& params)
{
    cascade.validate();
    params.validate();
    const std::size_t n = cascade.size();
    if (covariates.x.size() != n || eps.eps.size() != n)
        throw ValidationError("log_likelihood: covariates and random effects must have one entry per original");

    const KernelEvaluator kernel(params.lambda, params.psi, params.decay());
    const double log_phi = std::log(params.phi);
    const double theta = params.decay();
    const double lambda = params.lambda;
    const double psi = params.psi;
    const double horizon = cascade.horizon;

    CompensatedSum total;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double s = cascade.original_times[i];
        const double delta = linear_predictor(covariates.x[i], params.beta, params.kappa, eps.eps[i]);
        const double log_k = kernel.log_value(horizon - s);
        CompensatedSum term;
        if (log_k != neg_inf)
            term += -std::exp(log_phi + delta + log_k);
        for (double t : cascade.retweet_times[i])
        {
            const double u = t - s + psi;
            double log_shape = 0.0;
            if (u == 0.0)
            {
                if (lambda > 0.0)
                    throw DegenerateDataError("log_likelihood: retweet of original " + std::to_string(i) +
                                              " coincides with the original while psi = 0 and lambda > 0");
                if (lambda < 0.0)
                    return neg_inf;
            }
            else if (lambda != 0.0)
            {
                log_shape = -lambda * std::log(u);
            }
            term += log_phi + delta + log_shape - theta * (t - s);
        }
        total += term.value();
    }
    return total.value();
}

} // namespace hnhpp
