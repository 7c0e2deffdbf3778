#include "hnhpp/config.hpp"

#include <fstream>
#include <initializer_list>
#include <string_view>

#include "hnhpp/errors.hpp"

namespace hnhpp {

using nlohmann::json;

namespace {

void require_object(const json& j, std::string_view where, std::initializer_list<std::string_view> keys)
{
    if (!j.is_object())
        throw ValidationError("config: " + std::string(where) + " must be an object");
    for (const auto& [key, value] : j.items())
    {
        bool known = false;
        for (auto k : keys)
            known = known || k == key;
        if (!known)
            throw ValidationError("config: unknown key '" + std::string(where) + "." + key + "'");
    }
}

template <class T>
void read(const json& j, const char* key, T& out, std::string_view where)
{
    if (!j.contains(key))
        return;
    try
    {
        out = j.at(key).get<T>();
    }
    catch (const json::exception&)
    {
        throw ValidationError("config: bad value for '" + std::string(where) + "." + key + "'");
    }
}

Model read_model(const json& j, const char* key, Model fallback, std::string_view where)
{
    int m = static_cast<int>(fallback);
    read(j, key, m, where);
    if (m != 0 && m != 1)
        throw ValidationError("config: '" + std::string(where) + "." + key + "' must be 0 or 1");
    return static_cast<Model>(m);
}

void read_scales(const json& j, ProposalScales& s, std::string_view where)
{
    require_object(j, where, {"beta", "kappa", "lambda", "psi", "theta", "eps"});
    read(j, "beta", s.beta, where);
    read(j, "kappa", s.kappa, where);
    read(j, "lambda", s.lambda, where);
    read(j, "psi", s.psi, where);
    read(j, "theta", s.theta, where);
    read(j, "eps", s.eps, where);
}

void read_mcmc(const json& j, McmcConfig& c, std::string_view where)
{
    require_object(j, where,
                   {"burn_in", "thinning", "kept_length", "scales", "prior_model_prob_0", "adapt_during_burn_in",
                    "eps_every"});
    read(j, "burn_in", c.burn_in, where);
    read(j, "thinning", c.thinning, where);
    read(j, "kept_length", c.kept_length, where);
    read(j, "prior_model_prob_0", c.prior_model_prob_0, where);
    read(j, "adapt_during_burn_in", c.adapt_during_burn_in, where);
    read(j, "eps_every", c.eps_every, where);
    if (j.contains("scales"))
        read_scales(j.at("scales"), c.scales, std::string(where) + ".scales");
}

json mcmc_json(const McmcConfig& c)
{
    return {{"burn_in", c.burn_in},
            {"thinning", c.thinning},
            {"kept_length", c.kept_length},
            {"prior_model_prob_0", c.prior_model_prob_0},
            {"adapt_during_burn_in", c.adapt_during_burn_in},
            {"eps_every", c.eps_every},
            {"scales",
             {{"beta", c.scales.beta},
              {"kappa", c.scales.kappa},
              {"lambda", c.scales.lambda},
              {"psi", c.scales.psi},
              {"theta", c.scales.theta},
              {"eps", c.scales.eps}}}};
}

} // namespace

void RunConfig::validate() const
{
    if (chains < 1)
        throw ValidationError("config: chains must be at least 1");
    priors.validate();
    mcmc.validate();
    selection.pilot.validate();
    selection.probe.validate();
    selection.jumps.validate();
    if (selection.pseudoprior)
        selection.pseudoprior->validate();
    if (selection.method != "gvs" && selection.method != "rjmcmc" && selection.method != "both")
        throw ValidationError("config: selection.method must be gvs, rjmcmc or both");
    if (selection.rebalance_rounds < 1)
        throw ValidationError("config: selection.rebalance_rounds must be at least 1");
    if (!(diagnose.level > 0.0 && diagnose.level < 1.0))
        throw ValidationError("config: diagnose.level must lie in (0, 1)");
    simulate.params.validate();
    if (!(simulate.horizon > 0.0))
        throw ValidationError("config: simulate.horizon must be positive");
    if (!(simulate.follower_alpha > 1.0))
        throw ValidationError("config: simulate.follower_alpha must exceed 1");
    if (simulate.follower_min < 1)
        throw ValidationError("config: simulate.follower_min must be at least 1");
    if (mle.sequence.empty())
        throw ValidationError("config: mle.sequence must not be empty");
}

RunConfig config_from_json(const json& doc)
{
    RunConfig c;
    require_object(doc, "config", {"seed", "model", "chains", "priors", "mcmc", "selection", "diagnose", "simulate", "mle"});
    read(doc, "seed", c.seed, "config");
    c.model = read_model(doc, "model", c.model, "config");
    read(doc, "chains", c.chains, "config");

    if (doc.contains("priors"))
    {
        const auto& p = doc.at("priors");
        auto& s = c.priors;
        require_object(p, "priors",
                       {"mu_beta", "tau_beta", "mu_kappa", "tau_kappa", "a_lambda", "b_lambda", "a_phi", "b_phi",
                        "a_psi", "b_psi", "a_tau", "b_tau", "a_theta", "b_theta"});
        read(p, "mu_beta", s.mu_beta, "priors");
        read(p, "tau_beta", s.tau_beta, "priors");
        read(p, "mu_kappa", s.mu_kappa, "priors");
        read(p, "tau_kappa", s.tau_kappa, "priors");
        read(p, "a_lambda", s.a_lambda, "priors");
        read(p, "b_lambda", s.b_lambda, "priors");
        read(p, "a_phi", s.a_phi, "priors");
        read(p, "b_phi", s.b_phi, "priors");
        read(p, "a_psi", s.a_psi, "priors");
        read(p, "b_psi", s.b_psi, "priors");
        read(p, "a_tau", s.a_tau, "priors");
        read(p, "b_tau", s.b_tau, "priors");
        read(p, "a_theta", s.a_theta, "priors");
        read(p, "b_theta", s.b_theta, "priors");
    }
    if (doc.contains("mcmc"))
        read_mcmc(doc.at("mcmc"), c.mcmc, "mcmc");

    if (doc.contains("selection"))
    {
        const auto& j = doc.at("selection");
        auto& s = c.selection;
        require_object(j, "selection", {"method", "pilot", "pseudoprior", "rebalance", "probe", "rebalance_rounds", "p01", "p10"});
        read(j, "method", s.method, "selection");
        if (j.contains("pilot"))
            read_mcmc(j.at("pilot"), s.pilot, "selection.pilot");
        if (j.contains("probe"))
            read_mcmc(j.at("probe"), s.probe, "selection.probe");
        if (j.contains("pseudoprior") && !j.at("pseudoprior").is_null())
        {
            const auto& pp = j.at("pseudoprior");
            require_object(pp, "selection.pseudoprior", {"shape", "rate"});
            PseudopriorSpec spec;
            read(pp, "shape", spec.shape, "selection.pseudoprior");
            read(pp, "rate", spec.rate, "selection.pseudoprior");
            s.pseudoprior = spec;
        }
        read(j, "rebalance", s.rebalance, "selection");
        read(j, "rebalance_rounds", s.rebalance_rounds, "selection");
        read(j, "p01", s.jumps.p01, "selection");
        read(j, "p10", s.jumps.p10, "selection");
    }

    if (doc.contains("diagnose"))
    {
        const auto& j = doc.at("diagnose");
        require_object(j, "diagnose", {"level", "chain_dir"});
        read(j, "level", c.diagnose.level, "diagnose");
        read(j, "chain_dir", c.diagnose.chain_dir, "diagnose");
    }

    if (doc.contains("simulate"))
    {
        const auto& j = doc.at("simulate");
        auto& s = c.simulate;
        require_object(j, "simulate",
                       {"model", "beta", "kappa", "lambda", "phi", "psi", "tau", "theta", "horizon", "originals",
                        "follower_alpha", "follower_min"});
        s.params.model = read_model(j, "model", s.params.model, "simulate");
        read(j, "beta", s.params.beta, "simulate");
        read(j, "kappa", s.params.kappa, "simulate");
        read(j, "lambda", s.params.lambda, "simulate");
        read(j, "phi", s.params.phi, "simulate");
        read(j, "psi", s.params.psi, "simulate");
        read(j, "tau", s.params.tau, "simulate");
        read(j, "theta", s.params.theta, "simulate");
        read(j, "horizon", s.horizon, "simulate");
        read(j, "originals", s.originals, "simulate");
        read(j, "follower_alpha", s.follower_alpha, "simulate");
        read(j, "follower_min", s.follower_min, "simulate");
    }

    if (doc.contains("mle"))
    {
        const auto& j = doc.at("mle");
        require_object(j, "mle", {"sequence"});
        read(j, "sequence", c.mle.sequence, "mle");
    }
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open config " + path);
    json doc;
    try
    {
        doc = json::parse(in);
    }
    catch (const json::parse_error& e)
    {
        throw ValidationError("config: " + std::string(e.what()));
    }
    return config_from_json(doc);
}

json to_json(const RunConfig& c)
{
    const auto& p = c.priors;
    const auto& s = c.simulate;
    json pseudo = nullptr;
    if (c.selection.pseudoprior)
        pseudo = {{"shape", c.selection.pseudoprior->shape}, {"rate", c.selection.pseudoprior->rate}};
    return {{"seed", c.seed},
            {"model", static_cast<int>(c.model)},
            {"chains", c.chains},
            {"priors",
             {{"mu_beta", p.mu_beta},
              {"tau_beta", p.tau_beta},
              {"mu_kappa", p.mu_kappa},
              {"tau_kappa", p.tau_kappa},
              {"a_lambda", p.a_lambda},
              {"b_lambda", p.b_lambda},
              {"a_phi", p.a_phi},
              {"b_phi", p.b_phi},
              {"a_psi", p.a_psi},
              {"b_psi", p.b_psi},
              {"a_tau", p.a_tau},
              {"b_tau", p.b_tau},
              {"a_theta", p.a_theta},
              {"b_theta", p.b_theta}}},
            {"mcmc", mcmc_json(c.mcmc)},
            {"selection",
             {{"method", c.selection.method},
              {"pilot", mcmc_json(c.selection.pilot)},
              {"pseudoprior", pseudo},
              {"rebalance", c.selection.rebalance},
              {"probe", mcmc_json(c.selection.probe)},
              {"rebalance_rounds", c.selection.rebalance_rounds},
              {"p01", c.selection.jumps.p01},
              {"p10", c.selection.jumps.p10}}},
            {"diagnose", {{"level", c.diagnose.level}, {"chain_dir", c.diagnose.chain_dir}}},
            {"simulate",
             {{"model", static_cast<int>(s.params.model)},
              {"beta", s.params.beta},
              {"kappa", s.params.kappa},
              {"lambda", s.params.lambda},
              {"phi", s.params.phi},
              {"psi", s.params.psi},
              {"tau", s.params.tau},
              {"theta", s.params.theta},
              {"horizon", s.horizon},
              {"originals", s.originals},
              {"follower_alpha", s.follower_alpha},
              {"follower_min", s.follower_min}}},
            {"mle", {{"sequence", c.mle.sequence}}}};
}

} // namespace hnhpp
