#pragma once

#include <span>
#include <string>
#include <vector>

#include "hnhpp/sampler.hpp"

namespace hnhpp {

/// Inverse empirical CDF with lower rounding: the ceil(p n)-th smallest value.
/// `sorted` must be non-empty and ascending.
double empirical_quantile(std::span<const double> sorted, double p);

struct ParameterSummary
{
    std::string name;
    std::size_t count = 0;
    double mean = 0.0;
    double sd = 0.0;
    double q025 = 0.0;
    double q50 = 0.0;
    double q975 = 0.0;
};

ParameterSummary summarize(std::string name, std::vector<double> values);

/// Summaries of beta, kappa, lambda, phi, psi, tau, theta and log_lik over the
/// draws; theta is summarised over the draws that carry it and skipped if none do.
std::vector<ParameterSummary> summarize_chain(const Chain& chain);

} // namespace hnhpp
