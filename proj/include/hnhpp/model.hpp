#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace hnhpp {

/// Model indicator: 0 is the generalised power-law process (theta = 0),
/// 1 the generalised hybrid process with an exponential cutoff (theta > 0).
enum class Model : int
{
    PowerLaw = 0,
    Hybrid = 1,
};

std::string_view to_string(Model model);

/**
 * Observed originals and their retweets.
 *
 * Times are seconds relative to the start of observation. The horizon T is the
 * end of collection, stored explicitly because it is generally later than the
 * last event.
 */
struct EventCascade
{
    std::vector<double> original_times;
    std::vector<std::int64_t> follower_counts;
    std::vector<std::vector<double>> retweet_times;  // sorted within each original
    double horizon = 0.0;

    std::size_t size() const { return original_times.size(); }
    std::size_t total_retweets() const;
    std::size_t retweeted_originals() const;

    /// Throws ValidationError if any of the structural invariants fail:
    /// matching lengths, 0 <= s_i <= T, s_i <= t_i1 <= ... <= t_im <= T.
    void validate() const;
};

/// Mean-centred log follower counts, x_i = log(1 + x*_i) - mean_k log(1 + x*_k).
struct Covariates
{
    std::vector<double> x;
};

/// Scalar parameters of either model. theta is ignored when model is PowerLaw.
struct ScalarParams
{
    Model model = Model::PowerLaw;
    double beta = 0.0;
    double kappa = 0.0;
    double lambda = 0.5;
    double phi = 1.0;
    double psi = 1.0;
    double tau = 1.0;
    double theta = 0.0;

    /// theta as it enters the intensity (0 for the power-law model).
    double decay() const { return model == Model::Hybrid ? theta : 0.0; }

    /// lambda < 1, phi > 0, psi >= 0, tau > 0, theta > 0 iff model is Hybrid.
    void validate() const;
};

/// Per-original random effects eps_i ~ N(0, 1/tau).
struct LatentEffects
{
    std::vector<double> eps;
};

Covariates center_covariates(std::span<const std::int64_t> follower_counts);

/// delta_i = beta x_i + kappa x_i^2 + eps_i (no intercept; it lives in phi).
inline double linear_predictor(double x, double beta, double kappa, double eps)
{
    return beta * x + kappa * x * x + eps;
}

/**
 * h_i(t) = phi e^delta (t - s + psi)^-lambda e^(-theta (t - s)) for t >= s, else 0.
 *
 * Throws DegenerateDataError at the integrable singularity t = s, psi = 0,
 * lambda > 0.
 */
double intensity(double t, double s, double delta, const ScalarParams& params);

/**
 * log of the shape integral K(L) = int_psi^(psi+L) u^-lambda e^(-theta (u - psi)) du,
 * so that H_i(T) = phi e^delta K(T - s_i).
 *
 * For theta = 0 this is the closed form [(L+psi)^(1-lambda) - psi^(1-lambda)]/(1-lambda).
 * For theta > 0 it is the difference of lower incomplete gamma functions scaled
 * by theta^(lambda-1) e^(theta psi); the difference is formed in log space from
 * the series or continued-fraction representation appropriate to each endpoint,
 * and a short Gauss-Legendre rule is used when L << psi, where the two endpoint
 * values nearly cancel. Returns -inf for L = 0.
 */
double log_kernel_integral(double span, double lambda, double psi, double theta);

/**
 * Evaluates log_kernel_integral for many spans sharing (lambda, psi, theta).
 * The lower-endpoint quantities are computed once.
 */
class KernelEvaluator
{
  public:
    KernelEvaluator(double lambda, double psi, double theta);
    double log_value(double span) const;
    double value(double span) const;

  private:
    double lambda_;
    double psi_;
    double theta_;
    double a_;             // 1 - lambda
    double log_a_;
    double log_psi_;
    // theta > 0 only
    double log_theta_ = 0.0;
    double log_full_ = 0.0;          // log[Gamma(a) theta^-a e^(theta psi)]
    double log_lower_at_psi_ = 0.0;  // log[gamma(a, theta psi) theta^-a e^(theta psi)]
    double log_upper_at_psi_ = 0.0;  // log[Gamma(a, theta psi) theta^-a e^(theta psi)]
    bool psi_in_series_region_ = true;

    double log_value_hybrid(double span) const;
    double log_value_quadrature(double span) const;
};

/// H_i(T) = int_s^T h_i(t) dt; throws ValidationError if s > T.
double cumulative_intensity(double horizon, double s, double delta, const ScalarParams& params);

/**
 * Complete-data log-likelihood log f(m, t | x, s, eps, eta_M, M).
 *
 * Sum over originals of -H_i(T) + sum_j log h_i(t_ij), evaluated in log space
 * with compensated summation in original-index order. Throws ValidationError
 * for events outside [s_i, T] or invalid parameters, and DegenerateDataError
 * when t_ij = s_i with psi = 0 and lambda > 0.
 */
double log_likelihood(const EventCascade& cascade, const Covariates& covariates,
                      const LatentEffects& eps, const ScalarParams& params);

} // namespace hnhpp
