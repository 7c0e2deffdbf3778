#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "hnhpp/model.hpp"
#include "hnhpp/sampler.hpp"

namespace hnhpp {

inline McmcConfig short_run(std::size_t burn_in, std::size_t kept_length)
{
    McmcConfig c;
    c.burn_in = burn_in;
    c.kept_length = kept_length;
    return c;
}

struct SelectionSettings
{
    std::string method = "both";  // gvs, rjmcmc or both
    McmcConfig pilot = short_run(1000, 2000);
    /// used instead of a pilot fit when set
    std::optional<PseudopriorSpec> pseudoprior;
    /// search for a prior pi(M=0) under which both models are visited
    bool rebalance = false;
    McmcConfig probe = short_run(200, 1000);
    int rebalance_rounds = 20;
    JumpProbabilities jumps;
};

struct DiagnoseSettings
{
    double level = 0.95;
    /// directory holding chain.csv and chain_eps.csv from an earlier fit; empty runs a new chain
    std::string chain_dir;
};

struct SimulateSettings
{
    ScalarParams params{.model = Model::PowerLaw, .beta = 0.6, .kappa = -0.05, .lambda = 0.6, .phi = 0.025,
                        .psi = 60.0, .tau = 2.0, .theta = 0.0};
    double horizon = 36000.0;
    /// originals generated when no originals file is given
    std::size_t originals = 500;
    double follower_alpha = 2.5;
    std::int64_t follower_min = 1;
};

struct MleSettings
{
    /// "originals", "top" (retweets of the most-retweeted original) or an original id
    std::string sequence = "originals";
};

struct RunConfig
{
    std::uint64_t seed = 1;
    Model model = Model::PowerLaw;
    int chains = 1;
    PriorSpec priors;
    McmcConfig mcmc;
    SelectionSettings selection;
    DiagnoseSettings diagnose;
    SimulateSettings simulate;
    MleSettings mle;

    void validate() const;
};

/// Overlays the JSON document on the defaults; unknown keys are errors.
RunConfig config_from_json(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);
/// Every setting, defaults included.
nlohmann::json to_json(const RunConfig& config);

} // namespace hnhpp
