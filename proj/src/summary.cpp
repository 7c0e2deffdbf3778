#include "hnhpp/summary.hpp"

#include <algorithm>
#include <cmath>

#include "hnhpp/errors.hpp"
#include "hnhpp/numeric.hpp"

namespace hnhpp {

double empirical_quantile(std::span<const double> sorted, double p)
{
    if (sorted.empty())
        throw ValidationError("empirical_quantile: no values");
    if (!(p >= 0.0 && p <= 1.0))
        throw ValidationError("empirical_quantile: p must lie in [0, 1]");
    const auto n = static_cast<std::ptrdiff_t>(sorted.size());
    const auto k = static_cast<std::ptrdiff_t>(std::ceil(p * static_cast<double>(n))) - 1;
    return sorted[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, n - 1))];
}

ParameterSummary summarize(std::string name, std::vector<double> values)
{
    if (values.empty())
        throw ValidationError("summarize: no values for " + name);
    ParameterSummary s;
    s.name = std::move(name);
    s.count = values.size();
    CompensatedSum sum;
    for (double v : values)
        sum += v;
    s.mean = sum.value() / static_cast<double>(values.size());
    CompensatedSum sq;
    for (double v : values)
        sq += (v - s.mean) * (v - s.mean);
    s.sd = values.size() > 1 ? std::sqrt(sq.value() / static_cast<double>(values.size() - 1)) : 0.0;
    std::sort(values.begin(), values.end());
    s.q025 = empirical_quantile(values, 0.025);
    s.q50 = empirical_quantile(values, 0.5);
    s.q975 = empirical_quantile(values, 0.975);
    return s;
}

std::vector<ParameterSummary> summarize_chain(const Chain& chain)
{
    if (chain.draws.empty())
        throw ValidationError("summarize_chain: chain has no draws");
    const std::size_t n = chain.draws.size();
    std::vector<double> beta(n), kappa(n), lambda(n), phi(n), psi(n), tau(n), ll(n), theta;
    for (std::size_t k = 0; k < n; ++k)
    {
        const auto& d = chain.draws[k];
        beta[k] = d.beta;
        kappa[k] = d.kappa;
        lambda[k] = d.lambda;
        phi[k] = d.phi;
        psi[k] = d.psi;
        tau[k] = d.tau;
        ll[k] = d.log_likelihood;
        if (!std::isnan(d.theta))
            theta.push_back(d.theta);
    }
    std::vector<ParameterSummary> out;
    out.push_back(summarize("beta", std::move(beta)));
    out.push_back(summarize("kappa", std::move(kappa)));
    out.push_back(summarize("lambda", std::move(lambda)));
    out.push_back(summarize("phi", std::move(phi)));
    out.push_back(summarize("psi", std::move(psi)));
    out.push_back(summarize("tau", std::move(tau)));
    if (!theta.empty())
        out.push_back(summarize("theta", std::move(theta)));
    out.push_back(summarize("log_lik", std::move(ll)));
    return out;
}

} // namespace hnhpp
