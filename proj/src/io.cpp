#include "hnhpp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "hnhpp/errors.hpp"

namespace hnhpp {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true)
    {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return fields;
}

bool parse_number(std::string_view text, double& out)
{
    if (!text.empty() && text.front() == '+')
        text.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

template <class Int>
bool parse_int(std::string_view text, Int& out)
{
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

// days since 1970-01-01 of a proleptic Gregorian date
long long days_from_civil(long long y, unsigned m, unsigned d)
{
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

bool parse_iso8601(std::string_view s, double& out)
{
    auto digits = [&](std::size_t pos, std::size_t len, int& value) {
        if (pos + len > s.size())
            return false;
        return parse_int(s.substr(pos, len), value);
    };
    int year, month, day, hour = 0, minute = 0, second = 0;
    if (!digits(0, 4, year) || s.size() < 10 || s[4] != '-' || !digits(5, 2, month) || s[7] != '-' ||
        !digits(8, 2, day))
        return false;
    if (month < 1 || month > 12 || day < 1 || day > 31)
        return false;
    std::size_t pos = 10;
    double fraction = 0.0;
    if (pos < s.size())
    {
        if (s[pos] != 'T' && s[pos] != ' ')
            return false;
        if (!digits(pos + 1, 2, hour) || pos + 3 >= s.size() || s[pos + 3] != ':' || !digits(pos + 4, 2, minute))
            return false;
        pos += 6;
        if (pos < s.size() && s[pos] == ':')
        {
            if (!digits(pos + 1, 2, second))
                return false;
            pos += 3;
            if (pos < s.size() && s[pos] == '.')
            {
                std::size_t end = pos + 1;
                while (end < s.size() && s[end] >= '0' && s[end] <= '9')
                    ++end;
                if (end == pos + 1)
                    return false;
                std::string frac = "0";
                frac.append(s.substr(pos, end - pos));
                if (!parse_number(frac, fraction))
                    return false;
                pos = end;
            }
        }
        if (hour > 23 || minute > 59 || second > 60)
            return false;
    }
    long long offset = 0;
    if (pos < s.size())
    {
        if (s[pos] == 'Z' && pos + 1 == s.size())
        {
            pos += 1;
        }
        else if (s[pos] == '+' || s[pos] == '-')
        {
            int oh, om;
            if (!digits(pos + 1, 2, oh) || pos + 6 != s.size() || s[pos + 3] != ':' || !digits(pos + 4, 2, om))
                return false;
            offset = (s[pos] == '+' ? 1 : -1) * (oh * 3600LL + om * 60LL);
            pos += 6;
        }
        else
        {
            return false;
        }
    }
    const long long whole = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)) * 86400LL +
                            hour * 3600LL + minute * 60LL + second - offset;
    out = static_cast<double>(whole) + fraction;
    return true;
}

std::string row_error(std::string_view file, std::size_t row, const std::string& message)
{
    return std::string(file) + " row " + std::to_string(row) + ": " + message;
}

/// Next non-blank, non-comment line; comment lines are handed to `on_comment`.
template <class OnComment>
bool next_line(std::istream& in, std::string& line, std::size_t& row, OnComment&& on_comment)
{
    while (std::getline(in, line))
    {
        ++row;
        const auto t = trim(line);
        if (t.empty())
            continue;
        if (t.front() == '#')
        {
            on_comment(t.substr(1));
            continue;
        }
        line = std::string(t);
        return true;
    }
    return false;
}

void expect_header(std::string_view line, std::string_view expected, std::string_view file, std::size_t row)
{
    const auto fields = split(line);
    const auto want = split(expected);
    if (fields != want)
        throw ValidationError(row_error(file, row, "expected header '" + std::string(expected) + "'"));
}

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open " + path.string());
    return in;
}

} // namespace

std::string format_double(double v)
{
    char buf[32];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(len));
}

TimeFormat parse_time_format(std::string_view name)
{
    if (name == "auto")
        return TimeFormat::Auto;
    if (name == "seconds")
        return TimeFormat::Seconds;
    if (name == "iso8601")
        return TimeFormat::Iso8601;
    throw ValidationError("unknown time format '" + std::string(name) + "' (expected auto, seconds or iso8601)");
}

double parse_time(std::string_view text, TimeFormat format)
{
    text = trim(text);
    double value = 0.0;
    if (format != TimeFormat::Iso8601 && parse_number(text, value))
        return value;
    if (format != TimeFormat::Seconds && parse_iso8601(text, value))
        return value;
    throw ValidationError("cannot parse time '" + std::string(text) + "'");
}

LoadedData load_cascade(std::istream& originals, std::istream& retweets, const LoadOptions& options)
{
    constexpr std::string_view originals_name = "originals";
    constexpr std::string_view retweets_name = "retweets";

    std::optional<std::string> horizon_text = options.horizon;
    auto on_comment = [&](std::string_view comment) {
        comment = trim(comment);
        constexpr std::string_view key = "horizon:";
        if (comment.substr(0, key.size()) == key && !options.horizon)
            horizon_text = std::string(trim(comment.substr(key.size())));
    };

    LoadedData data;
    std::vector<double> raw_times;
    std::unordered_map<std::string, std::size_t> index_of;
    std::string line;
    std::size_t row = 0;
    if (!next_line(originals, line, row, on_comment))
        throw ValidationError("originals: file is empty");
    expect_header(line, "id,time,followers", originals_name, row);
    while (next_line(originals, line, row, on_comment))
    {
        const auto fields = split(line);
        if (fields.size() != 3)
            throw ValidationError(row_error(originals_name, row, "expected 3 fields"));
        std::string id(fields[0]);
        if (id.empty())
            throw ValidationError(row_error(originals_name, row, "empty id"));
        double t;
        try
        {
            t = parse_time(fields[1], options.time_format);
        }
        catch (const ValidationError& e)
        {
            throw ValidationError(row_error(originals_name, row, e.what()));
        }
        std::int64_t followers;
        if (!parse_int(fields[2], followers) || followers < 0)
            throw ValidationError(row_error(originals_name, row, "follower count must be a non-negative integer"));
        if (!index_of.emplace(id, raw_times.size()).second)
            throw ValidationError(row_error(originals_name, row, "duplicate id '" + id + "'"));
        raw_times.push_back(t);
        data.cascade.follower_counts.push_back(followers);
        data.original_ids.push_back(std::move(id));
    }
    if (raw_times.empty())
        throw ValidationError("originals: no rows");
    if (!horizon_text)
        throw ValidationError("missing horizon: add a '# horizon: <time>' line to the originals file or pass --horizon");

    double raw_horizon;
    try
    {
        raw_horizon = parse_time(*horizon_text, options.time_format);
    }
    catch (const ValidationError& e)
    {
        throw ValidationError(std::string("horizon: ") + e.what());
    }
    const double origin = *std::min_element(raw_times.begin(), raw_times.end());
    data.time_origin = origin;
    auto& cascade = data.cascade;
    cascade.horizon = raw_horizon - origin;
    if (raw_horizon < origin)
        throw ValidationError("horizon precedes the first original");
    cascade.original_times.reserve(raw_times.size());
    for (std::size_t i = 0; i < raw_times.size(); ++i)
    {
        if (raw_times[i] > raw_horizon)
            throw ValidationError("originals: '" + data.original_ids[i] + "' is after the horizon");
        cascade.original_times.push_back(raw_times[i] - origin);
    }
    cascade.retweet_times.assign(raw_times.size(), {});

    row = 0;
    auto ignore = [](std::string_view) {};
    if (next_line(retweets, line, row, ignore))
    {
        expect_header(line, "original_id,time", retweets_name, row);
        while (next_line(retweets, line, row, ignore))
        {
            const auto fields = split(line);
            if (fields.size() != 2)
                throw ValidationError(row_error(retweets_name, row, "expected 2 fields"));
            const auto it = index_of.find(std::string(fields[0]));
            if (it == index_of.end())
                throw ValidationError(row_error(retweets_name, row, "unknown original id '" + std::string(fields[0]) + "'"));
            double t;
            try
            {
                t = parse_time(fields[1], options.time_format);
            }
            catch (const ValidationError& e)
            {
                throw ValidationError(row_error(retweets_name, row, e.what()));
            }
            const std::size_t i = it->second;
            if (t < raw_times[i])
                throw ValidationError(row_error(retweets_name, row, "retweet precedes its original '" + data.original_ids[i] + "'"));
            if (t > raw_horizon)
                throw ValidationError(row_error(retweets_name, row, "retweet is after the horizon"));
            cascade.retweet_times[i].push_back(std::max(t - origin, cascade.original_times[i]));
        }
    }
    for (auto& times : cascade.retweet_times)
        std::sort(times.begin(), times.end());
    cascade.validate();
    data.covariates = center_covariates(cascade.follower_counts);
    return data;
}

LoadedData load_cascade(const std::filesystem::path& originals, const std::filesystem::path& retweets,
                        const LoadOptions& options)
{
    auto o = open_input(originals);
    auto r = open_input(retweets);
    return load_cascade(o, r, options);
}

std::string summary_line(const EventCascade& cascade)
{
    return std::to_string(cascade.size()) + " originals, " + std::to_string(cascade.retweeted_originals()) +
           " retweeted, " + std::to_string(cascade.total_retweets()) + " retweets";
}

void write_cascade(std::ostream& originals, std::ostream& retweets, const EventCascade& cascade,
                   std::span<const std::string> ids)
{
    if (!ids.empty() && ids.size() != cascade.size())
        throw ValidationError("write_cascade: one id per original required");
    auto id = [&](std::size_t i) { return ids.empty() ? std::to_string(i) : ids[i]; };
    originals << "# horizon: " << format_double(cascade.horizon) << '\n' << "id,time,followers\n";
    for (std::size_t i = 0; i < cascade.size(); ++i)
        originals << id(i) << ',' << format_double(cascade.original_times[i]) << ',' << cascade.follower_counts[i]
                  << '\n';
    retweets << "original_id,time\n";
    for (std::size_t i = 0; i < cascade.size(); ++i)
        for (double t : cascade.retweet_times[i])
            retweets << id(i) << ',' << format_double(t) << '\n';
}

void write_scatter_csv(std::ostream& out, const EventCascade& cascade, const Covariates& covariates)
{
    if (covariates.x.size() != cascade.size())
        throw ValidationError("write_scatter_csv: covariates must have one entry per original");
    out << "original,x,m_star\n";
    for (std::size_t i = 0; i < cascade.size(); ++i)
    {
        const double m = static_cast<double>(cascade.retweet_times[i].size());
        out << i << ',' << format_double(covariates.x[i]) << ',' << format_double(std::log1p(m)) << '\n';
    }
}

std::vector<DuaneSeries> exploration_series(const EventCascade& cascade)
{
    std::vector<DuaneSeries> out;
    auto add = [&](std::string name, std::vector<double> times, double horizon) {
        std::sort(times.begin(), times.end());
        // the time origin itself has no Duane coordinate
        std::vector<double> positive;
        for (double t : times)
            if (t > 0.0)
                positive.push_back(t);
        DuaneSeries series;
        series.name = std::move(name);
        if (positive.size() < 2 || !(horizon > 0.0))
        {
            out.push_back(std::move(series));
            return;
        }
        series.fit = fit_power_law_mle(positive, horizon);
        // the i-th event keeps its rank even if earlier events sat at the origin
        const std::size_t skipped = times.size() - positive.size();
        for (std::size_t k = 0; k < positive.size(); ++k)
        {
            const double log_t = std::log(positive[k]);
            series.points.push_back({log_t, log_t - std::log(static_cast<double>(k + skipped + 1))});
        }
        out.push_back(std::move(series));
    };

    add("originals", cascade.original_times, cascade.horizon);
    std::size_t top = 0;
    for (std::size_t i = 1; i < cascade.size(); ++i)
        if (cascade.retweet_times[i].size() > cascade.retweet_times[top].size())
            top = i;
    if (cascade.size() > 0)
    {
        std::vector<double> relative;
        for (double t : cascade.retweet_times[top])
            relative.push_back(t - cascade.original_times[top]);
        add("top_original_" + std::to_string(top), std::move(relative), cascade.horizon - cascade.original_times[top]);
    }
    return out;
}

void write_duane_csv(std::ostream& out, std::span<const DuaneSeries> series)
{
    out << "series,log_time,log_mtbf,reference\n";
    for (const auto& s : series)
    {
        if (s.points.empty())
            continue;
        const auto [slope, intercept] = duane_reference_line(s.fit.params);
        for (const auto& p : s.points)
            out << s.name << ',' << format_double(p.log_time) << ',' << format_double(p.log_mtbf) << ','
                << format_double(intercept + slope * p.log_time) << '\n';
    }
}

void write_duane_lines_csv(std::ostream& out, std::span<const DuaneSeries> series)
{
    out << "series,lambda,gamma,slope,intercept,log_lik\n";
    for (const auto& s : series)
    {
        if (s.points.empty())
            continue;
        const auto [slope, intercept] = duane_reference_line(s.fit.params);
        out << s.name << ',' << format_double(s.fit.params.lambda) << ',' << format_double(s.fit.params.gamma) << ','
            << format_double(slope) << ',' << format_double(intercept) << ',' << format_double(s.fit.log_likelihood)
            << '\n';
    }
}

void write_chain_csv(std::ostream& out, const Chain& chain)
{
    out << "iter,model,beta,kappa,lambda,phi,psi,tau,theta,log_lik\n";
    for (std::size_t k = 0; k < chain.draws.size(); ++k)
    {
        const auto& d = chain.draws[k];
        out << k << ',' << static_cast<int>(d.model) << ',' << format_double(d.beta) << ',' << format_double(d.kappa)
            << ',' << format_double(d.lambda) << ',' << format_double(d.phi) << ',' << format_double(d.psi) << ','
            << format_double(d.tau) << ',' << (std::isnan(d.theta) ? std::string() : format_double(d.theta)) << ','
            << format_double(d.log_likelihood) << '\n';
    }
}

void write_eps_csv(std::ostream& out, const Chain& chain)
{
    out << "draw,original,eps\n";
    for (const auto& rec : chain.eps_records)
        for (std::size_t i = 0; i < rec.eps.size(); ++i)
            out << rec.draw_index << ',' << i << ',' << format_double(rec.eps[i]) << '\n';
}

Chain read_chain_csv(std::istream& chain_csv, std::istream* eps_csv)
{
    constexpr std::string_view name = "chain";
    Chain chain;
    std::string line;
    std::size_t row = 0;
    auto ignore = [](std::string_view) {};
    if (!next_line(chain_csv, line, row, ignore))
        throw ValidationError("chain: file is empty");
    expect_header(line, "iter,model,beta,kappa,lambda,phi,psi,tau,theta,log_lik", name, row);
    while (next_line(chain_csv, line, row, ignore))
    {
        const auto f = split(line);
        if (f.size() != 10)
            throw ValidationError(row_error(name, row, "expected 10 fields"));
        int model;
        if (!parse_int(f[1], model) || (model != 0 && model != 1))
            throw ValidationError(row_error(name, row, "model must be 0 or 1"));
        Draw d;
        d.model = static_cast<Model>(model);
        double* targets[] = {&d.beta, &d.kappa, &d.lambda, &d.phi, &d.psi, &d.tau};
        for (std::size_t k = 0; k < 6; ++k)
            if (!parse_number(f[k + 2], *targets[k]))
                throw ValidationError(row_error(name, row, "bad number"));
        if (f[8].empty())
            d.theta = std::numeric_limits<double>::quiet_NaN();
        else if (!parse_number(f[8], d.theta))
            throw ValidationError(row_error(name, row, "bad theta"));
        if (!parse_number(f[9], d.log_likelihood))
            throw ValidationError(row_error(name, row, "bad log_lik"));
        chain.draws.push_back(d);
    }
    if (!eps_csv)
        return chain;

    constexpr std::string_view eps_name = "eps";
    row = 0;
    if (!next_line(*eps_csv, line, row, ignore))
        return chain;
    expect_header(line, "draw,original,eps", eps_name, row);
    while (next_line(*eps_csv, line, row, ignore))
    {
        const auto f = split(line);
        std::size_t draw, original;
        double value;
        if (f.size() != 3 || !parse_int(f[0], draw) || !parse_int(f[1], original) || !parse_number(f[2], value))
            throw ValidationError(row_error(eps_name, row, "expected draw,original,eps"));
        if (chain.eps_records.empty() || chain.eps_records.back().draw_index != draw)
            chain.eps_records.push_back({draw, {}});
        auto& rec = chain.eps_records.back();
        if (original != rec.eps.size())
            throw ValidationError(row_error(eps_name, row, "originals out of order"));
        rec.eps.push_back(value);
    }
    return chain;
}

void write_pairs_csv(std::ostream& out, std::span<const DiscrepancyPair> pairs)
{
    out << "draw,chi_sq_actual,chi_sq_simulated\n";
    for (const auto& p : pairs)
        out << p.draw_index << ',' << format_double(p.chi_sq_actual) << ',' << format_double(p.chi_sq_simulated)
            << '\n';
}

void write_intervals_csv(std::ostream& out, std::span<const PredictionInterval> intervals,
                         std::span<const std::string> ids)
{
    out << "original,id,observed,mean,lower,upper,widest\n";
    for (const auto& iv : intervals)
    {
        const std::string id = ids.empty() ? std::to_string(iv.original) : ids[iv.original];
        out << iv.original << ',' << id << ',' << iv.observed << ',' << format_double(iv.mean) << ',' << iv.lower
            << ',' << iv.upper << ',' << (iv.widest_for_count ? 1 : 0) << '\n';
    }
}

} // namespace hnhpp
