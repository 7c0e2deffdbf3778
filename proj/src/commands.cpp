#include "hnhpp/commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "hnhpp/classical.hpp"
#include "hnhpp/config.hpp"
#include "hnhpp/diagnostics.hpp"
#include "hnhpp/errors.hpp"
#include "hnhpp/io.hpp"
#include "hnhpp/simulator.hpp"
#include "hnhpp/summary.hpp"

namespace hnhpp {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Context
{
    CommandOptions options;
    RunConfig config;
    std::uint64_t seed = 0;
    fs::path out_dir;
};

std::ofstream open_output(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ValidationError("cannot write " + path.string());
    return out;
}

void write_json(const fs::path& path, const json& doc)
{
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
}

LoadedData load_inputs(const Context& ctx)
{
    if (ctx.options.originals.empty() || ctx.options.retweets.empty())
        throw ValidationError(ctx.options.command + ": --originals and --retweets are required");
    LoadOptions opts;
    opts.horizon = ctx.options.horizon;
    opts.time_format = parse_time_format(ctx.options.time_format);
    return load_cascade(fs::path(ctx.options.originals), fs::path(ctx.options.retweets), opts);
}

json params_json(const std::vector<ParameterSummary>& summaries)
{
    json out = json::object();
    for (const auto& s : summaries)
        out[s.name] = {{"count", s.count}, {"mean", s.mean}, {"sd", s.sd},
                       {"q025", s.q025}, {"q50", s.q50}, {"q975", s.q975}};
    return out;
}

json acceptance_json(const AcceptanceStats& a)
{
    auto rate = [](const UpdateCounter& c) -> json { return c.proposed == 0 ? json(nullptr) : json(c.rate()); };
    return {{"beta", rate(a.beta)},   {"kappa", rate(a.kappa)}, {"lambda", rate(a.lambda)},
            {"psi", rate(a.psi)},     {"theta", rate(a.theta)}, {"eps", rate(a.eps)},
            {"model_jump", rate(a.model_jump)}};
}

json scales_json(const ProposalScales& s)
{
    return {{"beta", s.beta}, {"kappa", s.kappa}, {"lambda", s.lambda},
            {"psi", s.psi},   {"theta", s.theta}, {"eps", s.eps}};
}

json chain_json(const Chain& chain)
{
    return {{"draws", chain.draws.size()},
            {"parameters", params_json(summarize_chain(chain))},
            {"acceptance", acceptance_json(chain.acceptance)},
            {"final_scales", scales_json(chain.final_scales)},
            {"wall_seconds", chain.wall_seconds}};
}

void write_chain_files(const fs::path& dir, const std::string& stem, const Chain& chain)
{
    auto c = open_output(dir / (stem + ".csv"));
    write_chain_csv(c, chain);
    auto e = open_output(dir / (stem + "_eps.csv"));
    write_eps_csv(e, chain);
}

json base_summary(const Context& ctx)
{
    return {{"command", ctx.options.command}, {"seed", ctx.seed}, {"config", to_json(ctx.config)}};
}

// --- explore ------------------------------------------------------------------

void run_explore(const Context& ctx, std::ostream& out)
{
    const auto data = load_inputs(ctx);
    out << summary_line(data.cascade) << '\n';
    {
        auto f = open_output(ctx.out_dir / "scatter.csv");
        write_scatter_csv(f, data.cascade, data.covariates);
    }
    const auto series = exploration_series(data.cascade);
    {
        auto f = open_output(ctx.out_dir / "duane.csv");
        write_duane_csv(f, series);
    }
    {
        auto f = open_output(ctx.out_dir / "duane_lines.csv");
        write_duane_lines_csv(f, series);
    }
    json summary = base_summary(ctx);
    summary["data"] = summary_line(data.cascade);
    write_json(ctx.out_dir / "summary.json", summary);
}

// --- mle ----------------------------------------------------------------------

void run_mle(const Context& ctx, std::ostream& out)
{
    const auto data = load_inputs(ctx);
    const auto& cascade = data.cascade;
    const std::string& which = ctx.config.mle.sequence;

    std::vector<double> times;
    double horizon = cascade.horizon;
    if (which == "originals")
    {
        times = cascade.original_times;
    }
    else
    {
        std::size_t index = 0;
        if (which == "top")
        {
            for (std::size_t i = 1; i < cascade.size(); ++i)
                if (cascade.retweet_times[i].size() > cascade.retweet_times[index].size())
                    index = i;
        }
        else
        {
            const auto it = std::find(data.original_ids.begin(), data.original_ids.end(), which);
            if (it == data.original_ids.end())
                throw ValidationError("mle: unknown original id '" + which + "'");
            index = static_cast<std::size_t>(it - data.original_ids.begin());
        }
        for (double t : cascade.retweet_times[index])
            times.push_back(t - cascade.original_times[index]);
        horizon = cascade.horizon - cascade.original_times[index];
    }
    std::sort(times.begin(), times.end());
    // an event at the time origin carries no information about the shape
    times.erase(times.begin(), std::upper_bound(times.begin(), times.end(), 0.0));

    const auto power = fit_power_law_mle(times, horizon);
    const auto hybrid = fit_hybrid_mle(times, horizon);
    auto fit_json = [](const FitResult& f) {
        return json{{"lambda", f.params.lambda},         {"gamma", f.params.gamma},
                    {"theta", f.params.theta},           {"log_lik", f.log_likelihood},
                    {"converged", f.converged},          {"iterations", f.iterations}};
    };
    out << "power_law: lambda=" << format_double(power.params.lambda) << ", gamma=" << format_double(power.params.gamma)
        << ", log_lik=" << format_double(power.log_likelihood) << '\n';
    out << "hybrid: lambda=" << format_double(hybrid.params.lambda) << ", theta=" << format_double(hybrid.params.theta)
        << ", gamma=" << format_double(hybrid.params.gamma) << ", log_lik=" << format_double(hybrid.log_likelihood)
        << '\n';
    json summary = base_summary(ctx);
    summary["sequence"] = which;
    summary["events"] = times.size();
    summary["horizon"] = horizon;
    summary["power_law"] = fit_json(power);
    summary["hybrid"] = fit_json(hybrid);
    write_json(ctx.out_dir / "mle.json", summary);
}

// --- fit ----------------------------------------------------------------------

void run_fit(const Context& ctx, std::ostream& out)
{
    const auto data = load_inputs(ctx);
    out << summary_line(data.cascade) << '\n';
    const auto started = std::chrono::steady_clock::now();
    const int k = ctx.config.chains;
    std::vector<Chain> chains(static_cast<std::size_t>(k));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k));
    auto run_one = [&](int c) {
        try
        {
            McmcConfig mcmc = ctx.config.mcmc;
            mcmc.seed = k == 1 ? ctx.seed : mix64(ctx.seed + static_cast<std::uint64_t>(c));
            chains[c] = run_chain(ctx.config.model, data.cascade, data.covariates, ctx.config.priors, mcmc);
        }
        catch (...)
        {
            errors[c] = std::current_exception();
        }
    };
    if (k == 1)
    {
        run_one(0);
    }
    else
    {
        std::vector<std::jthread> workers;
        for (int c = 0; c < k; ++c)
            workers.emplace_back(run_one, c);
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    json summary = base_summary(ctx);
    summary["data"] = summary_line(data.cascade);
    summary["model"] = static_cast<int>(ctx.config.model);
    json list = json::array();
    for (int c = 0; c < k; ++c)
    {
        const std::string stem = k == 1 ? "chain" : "chain_" + std::to_string(c);
        write_chain_files(ctx.out_dir, stem, chains[c]);
        json entry = chain_json(chains[c]);
        entry["file"] = stem + ".csv";
        list.push_back(std::move(entry));
        out << stem << ": " << chains[c].draws.size() << " draws, lambda mean "
            << format_double(summarize_chain(chains[c])[2].mean) << '\n';
    }
    summary["chains"] = std::move(list);
    summary["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_json(ctx.out_dir / "summary.json", summary);
}

// --- select -------------------------------------------------------------------

std::string kind_name(BayesFactor::Kind kind)
{
    switch (kind)
    {
    case BayesFactor::Kind::LowerBound:
        return "lower_bound";
    case BayesFactor::Kind::UpperBound:
        return "upper_bound";
    default:
        return "estimate";
    }
}

void run_select(const Context& ctx, std::ostream& out)
{
    const auto data = load_inputs(ctx);
    const auto& sel = ctx.config.selection;
    out << summary_line(data.cascade) << '\n';
    const auto started = std::chrono::steady_clock::now();
    json summary = base_summary(ctx);
    summary["data"] = summary_line(data.cascade);

    PseudopriorSpec pseudo;
    std::optional<SamplerState> start;
    if (sel.pseudoprior)
    {
        pseudo = *sel.pseudoprior;
    }
    else
    {
        McmcConfig pilot = sel.pilot;
        pilot.seed = mix64(ctx.seed ^ stream_key("pilot"));
        const Chain chain = run_chain(Model::Hybrid, data.cascade, data.covariates, ctx.config.priors, pilot);
        pseudo = fit_pseudoprior(chain);
        start = chain.final_state;
        summary["pilot"] = chain_json(chain);
    }
    summary["pseudoprior"] = {{"shape", pseudo.shape}, {"rate", pseudo.rate}};

    McmcConfig mcmc = ctx.config.mcmc;
    if (sel.rebalance)
    {
        McmcConfig probe = sel.probe;
        probe.prior_model_prob_0 = mcmc.prior_model_prob_0;
        probe.seed = mix64(ctx.seed ^ stream_key("probe"));
        mcmc.prior_model_prob_0 = rebalance_model_prior(data.cascade, data.covariates, ctx.config.priors, pseudo,
                                                        probe, start, sel.rebalance_rounds);
    }
    summary["prior_model_prob_0"] = mcmc.prior_model_prob_0;

    auto report = [&](const std::string& name, const Chain& chain) {
        const auto bf = bayes_factor(chain, mcmc.prior_model_prob_0);
        out << name << ": M0=" << bf.count_0 << ", M1=" << bf.count_1 << ", B10=" << format_double(bf.value)
            << (bf.kind == BayesFactor::Kind::Estimate ? "" : " (" + kind_name(bf.kind) + ")") << '\n';
        json entry = chain_json(chain);
        entry["count_0"] = bf.count_0;
        entry["count_1"] = bf.count_1;
        entry["posterior_prob_0"] = static_cast<double>(bf.count_0) / static_cast<double>(chain.draws.size());
        entry["b10"] = bf.value;
        entry["b10_kind"] = kind_name(bf.kind);
        entry["file"] = name + ".csv";
        write_chain_files(ctx.out_dir, name, chain);
        summary[name] = std::move(entry);
    };
    if (sel.method == "gvs" || sel.method == "both")
    {
        McmcConfig c = mcmc;
        c.seed = mix64(ctx.seed ^ stream_key("gvs"));
        report("gvs", gvs_run(data.cascade, data.covariates, ctx.config.priors, pseudo, c, start));
    }
    if (sel.method == "rjmcmc" || sel.method == "both")
    {
        McmcConfig c = mcmc;
        c.seed = mix64(ctx.seed ^ stream_key("rjmcmc"));
        report("rjmcmc", rjmcmc_run(data.cascade, data.covariates, ctx.config.priors, pseudo, c, sel.jumps, start));
    }
    summary["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_json(ctx.out_dir / "summary.json", summary);
}

// --- diagnose -----------------------------------------------------------------

void run_diagnose(const Context& ctx, std::ostream& out)
{
    const auto data = load_inputs(ctx);
    out << summary_line(data.cascade) << '\n';
    const auto started = std::chrono::steady_clock::now();
    json summary = base_summary(ctx);

    Chain chain;
    if (!ctx.config.diagnose.chain_dir.empty())
    {
        const fs::path dir(ctx.config.diagnose.chain_dir);
        std::ifstream c(dir / "chain.csv");
        std::ifstream e(dir / "chain_eps.csv");
        if (!c || !e)
            throw ValidationError("diagnose: cannot open chain.csv and chain_eps.csv in " + dir.string());
        chain = read_chain_csv(c, &e);
        summary["chain_dir"] = dir.string();
    }
    else
    {
        McmcConfig mcmc = ctx.config.mcmc;
        mcmc.seed = mix64(ctx.seed ^ stream_key("chain"));
        chain = run_chain(ctx.config.model, data.cascade, data.covariates, ctx.config.priors, mcmc);
        write_chain_files(ctx.out_dir, "chain", chain);
        summary["chain"] = chain_json(chain);
    }

    const auto check = posterior_predictive_p(chain, data.cascade, data.covariates, ctx.seed);
    {
        auto f = open_output(ctx.out_dir / "discrepancy.csv");
        write_pairs_csv(f, check.pairs);
    }
    summary["p_value"] = check.p_value;
    out << "p_value=" << format_double(check.p_value) << '\n';

    if (chain.eps_records.size() >= 100)
    {
        const auto intervals =
            prediction_intervals(chain, data.cascade, data.covariates, ctx.config.diagnose.level, ctx.seed);
        auto f = open_output(ctx.out_dir / "intervals.csv");
        write_intervals_csv(f, intervals, data.original_ids);
        const double coverage = interval_coverage(intervals);
        summary["interval_coverage"] = coverage;
        out << "interval_coverage=" << format_double(coverage) << '\n';
    }
    else
    {
        summary["interval_coverage"] = nullptr;
        out << "intervals skipped: " << chain.eps_records.size() << " draws with eps records (need 100)\n";
    }
    summary["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_json(ctx.out_dir / "summary.json", summary);
}

// --- simulate -----------------------------------------------------------------

void run_simulate(const Context& ctx, std::ostream& out)
{
    const auto& s = ctx.config.simulate;
    std::vector<double> times;
    std::vector<std::int64_t> followers;
    std::vector<std::string> ids;
    double horizon = s.horizon;
    if (!ctx.options.originals.empty())
    {
        std::ifstream originals(ctx.options.originals);
        if (!originals)
            throw ValidationError("cannot open " + ctx.options.originals);
        std::istringstream no_retweets;
        LoadOptions opts;
        opts.horizon = ctx.options.horizon;
        opts.time_format = parse_time_format(ctx.options.time_format);
        auto data = load_cascade(originals, no_retweets, opts);
        times = std::move(data.cascade.original_times);
        followers = std::move(data.cascade.follower_counts);
        ids = std::move(data.original_ids);
        horizon = data.cascade.horizon;
    }
    else
    {
        if (ctx.options.horizon)
            horizon = parse_time(*ctx.options.horizon);
        Rng rng = Rng::substream(ctx.seed, stream_key("originals"));
        times.resize(s.originals);
        for (auto& t : times)
            t = horizon * rng.uniform();
        std::sort(times.begin(), times.end());
        followers = sample_followers(s.originals, s.follower_alpha, s.follower_min, rng);
    }

    const auto sim = simulate_cascade(times, followers, s.params, horizon, ctx.seed);
    {
        auto o = open_output(ctx.out_dir / "originals.csv");
        auto r = open_output(ctx.out_dir / "retweets.csv");
        write_cascade(o, r, sim.cascade, ids);
    }
    {
        auto f = open_output(ctx.out_dir / "truth_eps.csv");
        f << "original,eps\n";
        for (std::size_t i = 0; i < sim.eps.eps.size(); ++i)
            f << i << ',' << format_double(sim.eps.eps[i]) << '\n';
    }
    out << summary_line(sim.cascade) << '\n';
    json summary = base_summary(ctx);
    summary["data"] = summary_line(sim.cascade);
    write_json(ctx.out_dir / "summary.json", summary);
}

} // namespace

std::uint64_t command_seed(std::uint64_t seed, std::string_view command)
{
    return mix64(seed ^ stream_key(command));
}

void run_command(const CommandOptions& options, std::ostream& out)
{
    Context ctx;
    ctx.options = options;
    if (!options.config.empty())
        ctx.config = load_config(options.config);
    if (options.seed)
        ctx.config.seed = *options.seed;
    if (options.model)
    {
        if (*options.model != 0 && *options.model != 1)
            throw ValidationError("--model must be 0 or 1");
        ctx.config.model = static_cast<Model>(*options.model);
    }
    if (options.chains)
        ctx.config.chains = *options.chains;
    ctx.config.validate();
    ctx.seed = command_seed(ctx.config.seed, options.command);
    ctx.out_dir = options.out_dir.empty() ? fs::path(".") : fs::path(options.out_dir);
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec)
        throw ValidationError("cannot create output directory " + ctx.out_dir.string());

    if (options.command == "explore")
        run_explore(ctx, out);
    else if (options.command == "mle")
        run_mle(ctx, out);
    else if (options.command == "fit")
        run_fit(ctx, out);
    else if (options.command == "select")
        run_select(ctx, out);
    else if (options.command == "diagnose")
        run_diagnose(ctx, out);
    else if (options.command == "simulate")
        run_simulate(ctx, out);
    else
        throw ValidationError("unknown command '" + options.command + "'");
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Hierarchical NHPP models for retweet cascades"};
    app.require_subcommand(1);
    CommandOptions options;
    std::uint64_t seed = 0;
    int model = 0;
    int chains = 1;
    std::string horizon;

    for (const char* name : {"explore", "mle", "fit", "select", "diagnose", "simulate"})
    {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--originals", options.originals, "originals CSV (id,time,followers)");
        sub->add_option("--retweets", options.retweets, "retweets CSV (original_id,time)");
        sub->add_option("--config", options.config, "JSON config");
        sub->add_option("--out-dir", options.out_dir, "output directory");
        sub->add_option("--seed", seed, "random seed");
        sub->add_option("--model", model, "0: power law, 1: hybrid")->check(CLI::IsMember({0, 1}));
        sub->add_option("--chains", chains, "independent chains (fit)")->check(CLI::PositiveNumber);
        sub->add_option("--horizon", horizon, "end of observation, in input time units");
        sub->add_option("--time-format", options.time_format, "auto, seconds or iso8601");
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp&)
    {
        out << app.help();
        return 0;
    }
    catch (const CLI::ParseError& e)
    {
        err << "error: validation: " << e.what() << '\n';
        return 2;
    }

    auto* sub = app.get_subcommands().front();
    options.command = sub->get_name();
    if (sub->count("--seed"))
        options.seed = seed;
    if (sub->count("--model"))
        options.model = model;
    if (sub->count("--chains"))
        options.chains = chains;
    if (sub->count("--horizon"))
        options.horizon = horizon;

    auto one_line = [](std::string s) {
        std::replace(s.begin(), s.end(), '\n', ' ');
        return s;
    };
    try
    {
        run_command(options, out);
        return 0;
    }
    catch (const ValidationError& e)
    {
        err << "error: validation: " << one_line(e.what()) << '\n';
        return 2;
    }
    catch (const NumericalError& e)
    {
        err << "error: numerical: " << one_line(e.what()) << '\n';
        return 3;
    }
    catch (const std::exception& e)
    {
        err << "error: numerical: " << one_line(e.what()) << '\n';
        return 3;
    }
}

} // namespace hnhpp
