#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "hnhpp/errors.hpp"
#include "hnhpp/io.hpp"
#include "hnhpp/simulator.hpp"
#include "hnhpp/summary.hpp"

using namespace hnhpp;

namespace {

LoadedData load(const std::string& originals, const std::string& retweets, LoadOptions opts = {})
{
    std::istringstream o(originals), r(retweets);
    return load_cascade(o, r, opts);
}

std::string error_of(const std::string& originals, const std::string& retweets)
{
    try
    {
        load(originals, retweets);
    }
    catch (const ValidationError& e)
    {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Load, TwoOriginalsNoRetweets)
{
    const auto d = load("# horizon: 100\nid,time,followers\na,10,5\nb,30,0\n", "original_id,time\n");
    EXPECT_EQ(d.cascade.size(), 2u);
    EXPECT_EQ(d.cascade.total_retweets(), 0u);
    EXPECT_DOUBLE_EQ(d.cascade.original_times[0], 0.0);
    EXPECT_DOUBLE_EQ(d.cascade.original_times[1], 20.0);
    EXPECT_DOUBLE_EQ(d.cascade.horizon, 90.0);
    EXPECT_DOUBLE_EQ(d.time_origin, 10.0);
    EXPECT_EQ(d.original_ids[1], "b");
    EXPECT_NEAR(d.covariates.x[0] + d.covariates.x[1], 0.0, 1e-15);
    EXPECT_EQ(summary_line(d.cascade), "2 originals, 0 retweeted, 0 retweets");
}

TEST(Load, RetweetsGroupedAndSorted)
{
    const auto d = load("id,time,followers\r\na,0,5\r\nb,5,1\r\n", "original_id,time\nb,9\na,3\nb,6\n",
                        LoadOptions{"20", TimeFormat::Auto});
    EXPECT_EQ(d.cascade.retweet_times[0], std::vector<double>{3.0});
    EXPECT_EQ(d.cascade.retweet_times[1], (std::vector<double>{6.0, 9.0}));
    EXPECT_EQ(summary_line(d.cascade), "2 originals, 2 retweeted, 3 retweets");
}

TEST(Load, Iso8601Times)
{
    const auto d = load("# horizon: 2017-05-01T00:00:00Z\nid,time,followers\n1,2017-04-30T23:00:00Z,3\n",
                        "original_id,time\n1,2017-04-30T23:30:00.250+00:00\n1,2017-05-01T01:10:00+02:00\n");
    EXPECT_DOUBLE_EQ(d.cascade.horizon, 3600.0);
    EXPECT_DOUBLE_EQ(d.cascade.retweet_times[0][0], 600.0);
    EXPECT_DOUBLE_EQ(d.cascade.retweet_times[0][1], 1800.25);
    EXPECT_DOUBLE_EQ(parse_time("1970-01-02T00:00:01Z"), 86401.0);
    EXPECT_DOUBLE_EQ(parse_time("2000-03-01", TimeFormat::Iso8601) - parse_time("2000-02-28", TimeFormat::Iso8601),
                     2.0 * 86400.0);
    EXPECT_THROW(parse_time("12.5", TimeFormat::Iso8601), ValidationError);
    EXPECT_THROW(parse_time("2017-04-30", TimeFormat::Seconds), ValidationError);
}

TEST(Load, ErrorsNameTheRow)
{
    const std::string originals = "# horizon: 100\nid,time,followers\na,10,5\n";
    EXPECT_EQ(error_of(originals, "original_id,time\na,20\nzz,30\n"), "retweets row 3: unknown original id 'zz'");
    EXPECT_EQ(error_of(originals, "original_id,time\na,5\n"), "retweets row 2: retweet precedes its original 'a'");
    EXPECT_EQ(error_of(originals, "original_id,time\na,101\n"), "retweets row 2: retweet is after the horizon");
    EXPECT_NE(error_of("id,time,followers\na,10,5\n", "").find("missing horizon"), std::string::npos);
    EXPECT_NE(error_of("# horizon: 100\nid,time\na,10\n", "").find("header"), std::string::npos);
    EXPECT_NE(error_of("# horizon: 100\nid,time,followers\na,10,-1\n", "").find("row 3"), std::string::npos);
    EXPECT_NE(error_of("# horizon: 100\nid,time,followers\na,10,1\na,11,1\n", "").find("duplicate"),
              std::string::npos);
}

TEST(Load, FlagOverridesFileHorizon)
{
    const auto d = load("# horizon: 100\nid,time,followers\na,0,5\n", "", LoadOptions{"50", TimeFormat::Seconds});
    EXPECT_DOUBLE_EQ(d.cascade.horizon, 50.0);
}

TEST(Load, PaperScaleSummaryLine)
{
    // 25420 originals, 3145 of them retweeted, 29751 retweets in total
    std::ostringstream o, r;
    o << "# horizon: 1000000\nid,time,followers\n";
    r << "original_id,time\n";
    std::size_t written = 0;
    for (int i = 0; i < 25420; ++i)
    {
        o << "t" << i << ',' << i * 10 << ',' << (i % 977) << '\n';
        if (i < 3145)
        {
            const int m = i < 1 ? 29751 - 3144 * 9 : 9;
            for (int k = 0; k < m; ++k, ++written)
                r << "t" << i << ',' << i * 10 + k + 1 << '\n';
        }
    }
    ASSERT_EQ(written, 29751u);
    const auto d = load(o.str(), r.str());
    EXPECT_EQ(summary_line(d.cascade), "25420 originals, 3145 retweeted, 29751 retweets");
}

TEST(Write, CascadeRoundTripIsLossless)
{
    ScalarParams p;
    p.lambda = 0.6;
    p.phi = 0.05;
    p.psi = 30.0;
    std::vector<double> times{0.0, 12.345678, 999.000001};
    std::vector<std::int64_t> f{3, 40, 500};
    const auto sim = simulate_cascade(times, f, p, 36000.0, 4);
    std::ostringstream o, r;
    write_cascade(o, r, sim.cascade);
    const auto d = load(o.str(), r.str());
    EXPECT_EQ(d.cascade.original_times, sim.cascade.original_times);
    EXPECT_EQ(d.cascade.retweet_times, sim.cascade.retweet_times);
    EXPECT_EQ(d.cascade.follower_counts, sim.cascade.follower_counts);
    EXPECT_EQ(d.cascade.horizon, 36000.0);
}

TEST(Write, ScatterColumns)
{
    EventCascade c;
    c.horizon = 10.0;
    c.original_times = {0.0, 1.0};
    c.follower_counts = {1, 2};
    c.retweet_times = {{}, {2.0}};
    std::ostringstream out;
    write_scatter_csv(out, c, Covariates{{-0.5, 0.5}});
    EXPECT_EQ(out.str(), "original,x,m_star\n0,-0.5,0\n1,0.5," + format_double(std::log(2.0)) + "\n");
    // m = e - 1 gives m* = 1
    EXPECT_DOUBLE_EQ(std::log1p(std::exp(1.0) - 1.0), 1.0);
}

TEST(Write, DuaneSeriesForOriginalsAndTopOriginal)
{
    ScalarParams p;
    p.lambda = 0.45;
    p.phi = 0.3;
    p.psi = 1.0;
    std::vector<double> times;
    std::vector<std::int64_t> f;
    for (int i = 0; i < 50; ++i)
        times.push_back(i * 100.0), f.push_back(i);
    const auto sim = simulate_cascade(times, f, p, 36000.0, 2);
    const auto series = exploration_series(sim.cascade);
    ASSERT_EQ(series.size(), 2u);
    EXPECT_EQ(series[0].name, "originals");
    EXPECT_EQ(series[0].points.size(), 49u);  // the origin itself is dropped
    std::ostringstream duane, lines;
    write_duane_csv(duane, series);
    write_duane_lines_csv(lines, series);
    const auto text = duane.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'),
              static_cast<long>(1 + series[0].points.size() + series[1].points.size()));
    EXPECT_EQ(lines.str().substr(0, 40), "series,lambda,gamma,slope,intercept,log_");
}

TEST(Chain, CsvReplayReproducesSummary)
{
    Chain chain;
    Rng rng(3);
    for (std::size_t k = 0; k < 500; ++k)
    {
        Draw d;
        d.model = k % 3 ? Model::PowerLaw : Model::Hybrid;
        d.beta = rng.uniform() - 0.5;
        d.kappa = 1e-3 * rng.uniform();
        d.lambda = 0.6 + 0.01 * rng.uniform();
        d.phi = 0.02 * rng.uniform();
        d.psi = 100.0 * rng.uniform();
        d.tau = 2.0 + rng.uniform();
        d.theta = d.model == Model::Hybrid ? 1e-5 * rng.uniform() : NAN;
        d.log_likelihood = -15000.0 * (1.0 + 1e-3 * rng.uniform());
        chain.draws.push_back(d);
        if (k % 10 == 0)
            chain.eps_records.push_back({k, {rng.uniform(), -rng.uniform()}});
    }
    std::stringstream csv, eps;
    write_chain_csv(csv, chain);
    write_eps_csv(eps, chain);
    const auto back = read_chain_csv(csv, &eps);
    ASSERT_EQ(back.draws.size(), chain.draws.size());
    const auto a = summarize_chain(chain);
    const auto b = summarize_chain(back);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k)
    {
        EXPECT_NEAR(a[k].mean, b[k].mean, 1e-12 * std::fabs(a[k].mean));
        EXPECT_EQ(a[k].q975, b[k].q975);
    }
    ASSERT_EQ(back.eps_records.size(), chain.eps_records.size());
    EXPECT_EQ(back.eps_records[7].eps, chain.eps_records[7].eps);
    EXPECT_EQ(back.eps_records[7].draw_index, 70u);
}

TEST(Summary, EmpiricalQuantileLowerRounding)
{
    const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    EXPECT_EQ(empirical_quantile(v, 0.025), 1.0);
    EXPECT_EQ(empirical_quantile(v, 0.5), 5.0);
    EXPECT_EQ(empirical_quantile(v, 0.51), 6.0);
    EXPECT_EQ(empirical_quantile(v, 0.975), 10.0);
    EXPECT_EQ(empirical_quantile(v, 0.0), 1.0);
    EXPECT_THROW(empirical_quantile(std::vector<double>{}, 0.5), ValidationError);
}
