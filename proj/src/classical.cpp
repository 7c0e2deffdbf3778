#include "hnhpp/classical.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "hnhpp/errors.hpp"
#include "hnhpp/model.hpp"
#include "hnhpp/numeric.hpp"

namespace hnhpp {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();
constexpr double inf = std::numeric_limits<double>::infinity();

void check_times(std::span<const double> times, double horizon)
{
    if (!std::isfinite(horizon) || horizon < 0.0)
        throw ValidationError("times: horizon must be finite and non-negative");
    double previous = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
    {
        const double t = times[i];
        if (!(t >= 0.0 && t <= horizon))
            throw ValidationError("times: event " + std::to_string(i) + " at " + std::to_string(t) +
                                  " outside [0, T]");
        if (t < previous)
            throw ValidationError("times: events must be sorted (event " + std::to_string(i) + ")");
        previous = t;
    }
}

void check_fit_input(std::span<const double> times, double horizon)
{
    if (times.size() < 2)
        throw ValidationError("mle: at least two events are required");
    check_times(times, horizon);
    if (!(times.front() > 0.0))
        throw ValidationError("mle: event times must be strictly positive");
}

struct NelderMeadResult
{
    std::array<double, 3> point;
    double value;
    bool converged;
    std::size_t evaluations;
};

// Minimises f over R^3. Stops when the simplex diameter falls below rel_tol
// relative to the coordinates or after max_evals evaluations.
NelderMeadResult nelder_mead(const std::function<double(const std::array<double, 3>&)>& f,
                             std::array<double, 3> start, std::array<double, 3> step, double rel_tol,
                             std::size_t max_evals)
{
    constexpr int dim = 3;
    std::array<std::array<double, 3>, dim + 1> simplex;
    std::array<double, dim + 1> values;
    std::size_t evals = 0;
    auto eval = [&](const std::array<double, 3>& p) {
        ++evals;
        const double v = f(p);
        return std::isnan(v) ? inf : v;
    };

    simplex[0] = start;
    values[0] = eval(start);
    for (int k = 0; k < dim; ++k)
    {
        simplex[k + 1] = start;
        simplex[k + 1][k] += step[k];
        values[k + 1] = eval(simplex[k + 1]);
    }

    bool converged = false;
    while (evals < max_evals)
    {
        std::array<int, dim + 1> order;
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
        const int best = order[0];
        const int worst = order[dim];
        const int second_worst = order[dim - 1];

        double diameter = 0.0;
        double scale = 1.0;
        for (int k = 0; k <= dim; ++k)
            for (int j = 0; j < dim; ++j)
            {
                diameter = std::max(diameter, std::fabs(simplex[k][j] - simplex[best][j]));
                scale = std::max(scale, std::fabs(simplex[best][j]));
            }
        if (diameter <= rel_tol * scale)
        {
            converged = true;
            break;
        }

        std::array<double, 3> centroid{};
        for (int k = 0; k <= dim; ++k)
        {
            if (k == worst)
                continue;
            for (int j = 0; j < dim; ++j)
                centroid[j] += simplex[k][j] / dim;
        }
        auto along = [&](double coefficient) {
            std::array<double, 3> p;
            for (int j = 0; j < dim; ++j)
                p[j] = centroid[j] + coefficient * (simplex[worst][j] - centroid[j]);
            return p;
        };

        const auto reflected = along(-1.0);
        const double f_reflected = eval(reflected);
        if (f_reflected < values[best])
        {
            const auto expanded = along(-2.0);
            const double f_expanded = eval(expanded);
            if (f_expanded < f_reflected)
            {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            }
            else
            {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if (f_reflected < values[second_worst])
        {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }
        const bool outside = f_reflected < values[worst];
        const auto contracted = along(outside ? -0.5 : 0.5);
        const double f_contracted = eval(contracted);
        if (f_contracted < (outside ? f_reflected : values[worst]))
        {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }
        for (int k = 0; k <= dim; ++k)
        {
            if (k == best)
                continue;
            for (int j = 0; j < dim; ++j)
                simplex[k][j] = simplex[best][j] + 0.5 * (simplex[k][j] - simplex[best][j]);
            values[k] = eval(simplex[k]);
        }
    }

    const auto best_it = std::min_element(values.begin(), values.end());
    const auto best_index = static_cast<std::size_t>(best_it - values.begin());
    return {simplex[best_index], *best_it, converged, evals};
}

} // namespace

void ClassicalParams::validate() const
{
    if (!(lambda < 1.0) || !std::isfinite(lambda))
        throw ValidationError("classical params: lambda must be finite and < 1");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw ValidationError("classical params: gamma must be positive");
    if (!(theta >= 0.0) || !std::isfinite(theta))
        throw ValidationError("classical params: theta must be non-negative");
}

double single_process_log_likelihood(std::span<const double> times, double horizon, const ClassicalParams& params)
{
    params.validate();
    check_times(times, horizon);
    const KernelEvaluator kernel(params.lambda, 0.0, params.theta);
    const double log_k = kernel.log_value(horizon);
    const double log_gamma = std::log(params.gamma);

    CompensatedSum total;
    if (log_k != neg_inf)
        total += -std::exp(log_gamma + log_k);
    for (double t : times)
    {
        double log_shape = 0.0;
        if (t == 0.0)
        {
            if (params.lambda > 0.0)
                throw DegenerateDataError("single process: event at t = 0 with lambda > 0 has infinite intensity");
            if (params.lambda < 0.0)
                return neg_inf;
        }
        else if (params.lambda != 0.0)
        {
            log_shape = -params.lambda * std::log(t);
        }
        total += log_gamma + log_shape - params.theta * t;
    }
    return total.value();
}

FitResult fit_power_law_mle(std::span<const double> times, double horizon)
{
    check_fit_input(times, horizon);
    const double n = static_cast<double>(times.size());
    const double log_n = std::log(n);
    const double log_horizon = std::log(horizon);
    CompensatedSum sum_log_times;
    for (double t : times)
        sum_log_times += std::log(t);
    const double sum_log = sum_log_times.value();

    auto log_gamma_hat = [&](double lambda) { return log_n + std::log1p(-lambda) - (1.0 - lambda) * log_horizon; };
    // profile log-likelihood with gamma at its conditional optimum
    auto profile = [&](double lambda) { return n * log_gamma_hat(lambda) - n - lambda * sum_log; };

    const double upper = 1.0 - 1e-9;
    double lower = -50.0;
    constexpr double golden = 0.6180339887498949;
    std::size_t iterations = 0;
    bool converged = false;
    double best = 0.0;
    for (int expansion = 0; expansion < 40; ++expansion)
    {
        double a = lower;
        double b = upper;
        double c = b - golden * (b - a);
        double d = a + golden * (b - a);
        double fc = profile(c);
        double fd = profile(d);
        while (b - a > 1e-13 * std::max(1.0, std::fabs(c)))
        {
            ++iterations;
            if (fc > fd)
            {
                b = d;
                d = c;
                fd = fc;
                c = b - golden * (b - a);
                fc = profile(c);
            }
            else
            {
                a = c;
                c = d;
                fc = fd;
                d = a + golden * (b - a);
                fd = profile(d);
            }
        }
        best = 0.5 * (a + b);
        if (best - lower > 1e-6 * std::max(1.0, std::fabs(lower)))
        {
            converged = true;
            break;
        }
        lower *= 2.0;
    }

    FitResult result;
    result.params.lambda = best;
    result.params.gamma = std::exp(log_gamma_hat(best));
    result.params.theta = 0.0;
    result.iterations = iterations;
    result.log_likelihood = single_process_log_likelihood(times, horizon, result.params);
    result.converged = converged && std::isfinite(result.log_likelihood);
    return result;
}

FitResult fit_hybrid_mle(std::span<const double> times, double horizon)
{
    const FitResult power_law = fit_power_law_mle(times, horizon);
    const double log_theta_floor = std::log(1e-12 / horizon);

    auto objective = [&](const std::array<double, 3>& z) {
        if (!(z[0] < 1.0))
            return inf;
        ClassicalParams p;
        p.lambda = z[0];
        p.theta = std::exp(std::max(z[1], log_theta_floor - 1.0));
        p.gamma = std::exp(z[2]);
        if (!(p.gamma > 0.0) || !std::isfinite(p.gamma))
            return inf;
        const double ll = single_process_log_likelihood(times, horizon, p);
        return std::isfinite(ll) ? -ll : inf;
    };

    std::array<double, 3> start{power_law.params.lambda, std::log(1.0 / horizon), std::log(power_law.params.gamma)};
    std::array<double, 3> step{0.1, 1.0, 0.5};
    std::size_t evaluations = 0;
    constexpr std::size_t max_evals = 100000;
    NelderMeadResult nm{start, objective(start), false, 0};
    // restart from the incumbent until a restart no longer improves it
    for (int restart = 0; restart < 8 && evaluations < max_evals; ++restart)
    {
        const auto next = nelder_mead(objective, nm.point, step, 1e-10, max_evals - evaluations);
        evaluations += next.evaluations;
        const bool improved = next.value < nm.value - 1e-12 * std::max(1.0, std::fabs(nm.value));
        if (next.value <= nm.value)
            nm = next;
        else
            nm.converged = next.converged;
        if (!improved && nm.converged)
            break;
    }

    FitResult result;
    result.iterations = power_law.iterations + evaluations;
    result.converged = nm.converged && power_law.converged;
    const bool on_boundary = nm.point[1] < log_theta_floor;
    if (on_boundary || !(-nm.value > power_law.log_likelihood))
    {
        result.params = power_law.params;
        result.log_likelihood = power_law.log_likelihood;
        result.converged = power_law.converged;
        return result;
    }
    result.params.lambda = nm.point[0];
    result.params.theta = std::exp(nm.point[1]);
    result.params.gamma = std::exp(nm.point[2]);
    result.log_likelihood = -nm.value;
    return result;
}

std::vector<DuanePoint> duane_points(std::span<const double> times)
{
    std::vector<DuanePoint> out;
    out.reserve(times.size());
    double previous = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
    {
        const double t = times[i];
        if (!(t > 0.0) || !std::isfinite(t))
            throw ValidationError("duane: times must be strictly positive (event " + std::to_string(i) + ")");
        if (t < previous)
            throw ValidationError("duane: times must be sorted");
        previous = t;
        const double log_t = std::log(t);
        out.push_back({log_t, log_t - std::log(static_cast<double>(i + 1))});
    }
    return out;
}

std::pair<double, double> duane_reference_line(const ClassicalParams& params)
{
    params.validate();
    return {params.lambda, std::log1p(-params.lambda) - std::log(params.gamma)};
}

} // namespace hnhpp
