#include "hnhpp/diagnostics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "hnhpp/errors.hpp"
#include "hnhpp/numeric.hpp"

namespace hnhpp {

namespace {

constexpr std::size_t min_interval_draws = 100;

std::int64_t draw_poisson(Rng& rng, double mean)
{
    if (!(mean > 0.0))
        return 0;
    std::poisson_distribution<std::int64_t> dist(mean);
    return dist(rng);
}

std::vector<std::uint64_t> original_keys(const EventCascade& cascade)
{
    std::vector<std::uint64_t> keys(cascade.size());
    for (std::size_t i = 0; i < cascade.size(); ++i)
    {
        const auto time_bits = std::bit_cast<std::uint64_t>(cascade.original_times[i]);
        keys[i] = mix64(time_bits ^ mix64(static_cast<std::uint64_t>(cascade.follower_counts[i])));
    }
    return keys;
}

const Draw& draw_for(const Chain& chain, const EpsRecord& record)
{
    if (record.draw_index >= chain.draws.size())
        throw ValidationError("diagnostics: eps record refers to a missing draw");
    return chain.draws[record.draw_index];
}

/// Simulated counts for one stored draw, keyed per original.
std::vector<double> simulate_for_draw(const std::vector<double>& base,
                                      std::span<const double> eps, const std::vector<std::uint64_t>& keys,
                                      std::uint64_t seed, std::uint64_t stream, std::size_t draw_index)
{
    std::vector<double> counts(base.size());
    for (std::size_t i = 0; i < base.size(); ++i)
    {
        Rng rng = Rng::substream(seed, stream ^ keys[i], draw_index);
        counts[i] = static_cast<double>(draw_poisson(rng, base[i] * std::exp(eps[i])));
    }
    return counts;
}

void check_records(const Chain& chain, const EventCascade& cascade)
{
    if (chain.eps_records.empty())
        throw ValidationError("diagnostics: chain has no eps records");
    for (const auto& rec : chain.eps_records)
        if (rec.eps.size() != cascade.size())
            throw ValidationError("diagnostics: eps record length does not match the data");
}

} // namespace

std::vector<double> base_cumulative_intensities(const EventCascade& cascade, const Covariates& covariates,
                                                const ScalarParams& params)
{
    params.validate();
    if (covariates.x.size() != cascade.size())
        throw ValidationError("diagnostics: covariates must have one entry per original");
    const KernelEvaluator kernel(params.lambda, params.psi, params.decay());
    std::vector<double> out(cascade.size());
    for (std::size_t i = 0; i < cascade.size(); ++i)
    {
        const double delta = linear_predictor(covariates.x[i], params.beta, params.kappa, 0.0);
        out[i] = params.phi * std::exp(delta) * kernel.value(cascade.horizon - cascade.original_times[i]);
    }
    return out;
}

double chi_square_discrepancy(std::span<const double> counts, std::span<const double> base_means, double tau)
{
    if (!(tau > 0.0))
        throw ValidationError("chi_square_discrepancy: tau must be positive");
    if (counts.size() != base_means.size())
        throw ValidationError("chi_square_discrepancy: counts and means differ in length");
    const double mean = std::exp(0.5 / tau);
    // e^(2/tau) - e^(1/tau) = e^(1/tau) (e^(1/tau) - 1)
    const double variance = std::exp(1.0 / tau) * std::expm1(1.0 / tau);
    CompensatedSum sum;
    for (std::size_t i = 0; i < counts.size(); ++i)
    {
        if (!(base_means[i] > 0.0))
            throw ValidationError("chi_square_discrepancy: cumulative intensity must be positive");
        const double r = counts[i] / base_means[i] - mean;
        sum += r * r;
    }
    return sum.value() / variance;
}

double chi_square_discrepancy(std::span<const double> counts, const EventCascade& cascade,
                              const Covariates& covariates, const ScalarParams& params)
{
    const auto base = base_cumulative_intensities(cascade, covariates, params);
    return chi_square_discrepancy(counts, base, params.tau);
}

std::vector<double> observed_counts(const EventCascade& cascade)
{
    std::vector<double> m(cascade.size());
    for (std::size_t i = 0; i < cascade.size(); ++i)
        m[i] = static_cast<double>(cascade.retweet_times[i].size());
    return m;
}

std::vector<std::int64_t> simulate_counts(const EventCascade& cascade, const Covariates& covariates,
                                          const ScalarParams& params, std::span<const double> eps, Rng& rng)
{
    if (eps.size() != cascade.size())
        throw ValidationError("simulate_counts: eps must have one entry per original");
    const auto base = base_cumulative_intensities(cascade, covariates, params);
    std::vector<std::int64_t> counts(base.size());
    for (std::size_t i = 0; i < base.size(); ++i)
        counts[i] = draw_poisson(rng, base[i] * std::exp(eps[i]));
    return counts;
}

PredictiveCheck posterior_predictive_p(const Chain& chain, const EventCascade& cascade,
                                       const Covariates& covariates, std::uint64_t seed)
{
    check_records(chain, cascade);
    const auto observed = observed_counts(cascade);
    const auto keys = original_keys(cascade);
    const std::uint64_t stream = stream_key("predictive-check");

    PredictiveCheck check;
    check.pairs.reserve(chain.eps_records.size());
    std::size_t exceed = 0;
    for (const auto& rec : chain.eps_records)
    {
        const ScalarParams params = draw_for(chain, rec).params();
        const auto base = base_cumulative_intensities(cascade, covariates, params);
        const auto simulated = simulate_for_draw(base, rec.eps, keys, seed, stream, rec.draw_index);
        DiscrepancyPair pair;
        pair.draw_index = rec.draw_index;
        pair.chi_sq_actual = chi_square_discrepancy(observed, base, params.tau);
        pair.chi_sq_simulated = chi_square_discrepancy(simulated, base, params.tau);
        if (pair.chi_sq_simulated > pair.chi_sq_actual)
            ++exceed;
        check.pairs.push_back(pair);
    }
    check.p_value = static_cast<double>(exceed) / static_cast<double>(check.pairs.size());
    return check;
}

std::vector<PredictionInterval> prediction_intervals(const Chain& chain, const EventCascade& cascade,
                                                     const Covariates& covariates, double level,
                                                     std::uint64_t seed)
{
    if (!(level > 0.0 && level < 1.0))
        throw ValidationError("prediction_intervals: level must lie in (0, 1)");
    check_records(chain, cascade);
    const std::size_t draws = chain.eps_records.size();
    if (draws < min_interval_draws)
        throw ValidationError("prediction_intervals: at least 100 draws with eps records are required, got " +
                              std::to_string(draws));

    const std::size_t n = cascade.size();
    const auto keys = original_keys(cascade);
    const std::uint64_t stream = stream_key("prediction-interval");
    // draws x originals, stored per original for the quantiles
    std::vector<std::vector<double>> samples(n, std::vector<double>(draws));
    for (std::size_t d = 0; d < draws; ++d)
    {
        const auto& rec = chain.eps_records[d];
        const auto base = base_cumulative_intensities(cascade, covariates, draw_for(chain, rec).params());
        const auto simulated = simulate_for_draw(base, rec.eps, keys, seed, stream, rec.draw_index);
        for (std::size_t i = 0; i < n; ++i)
            samples[i][d] = simulated[i];
    }

    auto quantile_index = [draws](double p) {
        const auto k = static_cast<std::ptrdiff_t>(std::ceil(p * static_cast<double>(draws))) - 1;
        return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(draws) - 1));
    };
    const std::size_t lo = quantile_index(0.5 * (1.0 - level));
    const std::size_t hi = quantile_index(0.5 * (1.0 + level));

    std::vector<PredictionInterval> out(n);
    std::map<std::int64_t, std::size_t> widest;
    for (std::size_t i = 0; i < n; ++i)
    {
        auto& values = samples[i];
        CompensatedSum sum;
        for (double v : values)
            sum += v;
        std::sort(values.begin(), values.end());
        auto& iv = out[i];
        iv.original = i;
        iv.observed = static_cast<std::int64_t>(cascade.retweet_times[i].size());
        iv.mean = sum.value() / static_cast<double>(draws);
        iv.lower = static_cast<std::int64_t>(values[lo]);
        iv.upper = static_cast<std::int64_t>(values[hi]);
        auto [it, inserted] = widest.try_emplace(iv.observed, i);
        if (!inserted)
        {
            const auto& best = out[it->second];
            if (iv.upper - iv.lower > best.upper - best.lower)
                it->second = i;
        }
    }
    for (const auto& [count, index] : widest)
        out[index].widest_for_count = true;
    return out;
}

double interval_coverage(std::span<const PredictionInterval> intervals)
{
    if (intervals.empty())
        throw ValidationError("interval_coverage: no intervals");
    std::size_t inside = 0;
    for (const auto& iv : intervals)
        inside += (iv.observed >= iv.lower && iv.observed <= iv.upper) ? 1 : 0;
    return static_cast<double>(inside) / static_cast<double>(intervals.size());
}

} // namespace hnhpp
