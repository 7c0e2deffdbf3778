#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hnhpp/classical.hpp"
#include "hnhpp/diagnostics.hpp"
#include "hnhpp/model.hpp"
#include "hnhpp/sampler.hpp"

namespace hnhpp {

enum class TimeFormat
{
    Auto,     // numeric if the field parses as a number, else ISO-8601
    Seconds,
    Iso8601,
};

TimeFormat parse_time_format(std::string_view name);

/// Seconds (since the Unix epoch for ISO-8601 input). Accepts
/// YYYY-MM-DD[T ]hh:mm:ss[.fff][Z|+hh:mm|-hh:mm].
double parse_time(std::string_view text, TimeFormat format = TimeFormat::Auto);

struct LoadOptions
{
    /// Horizon in input time units; overrides a "# horizon: <value>" line in the originals file.
    std::optional<std::string> horizon;
    TimeFormat time_format = TimeFormat::Auto;
};

struct LoadedData
{
    EventCascade cascade;
    Covariates covariates;
    std::vector<std::string> original_ids;
    double time_origin = 0.0;  // input time mapped to 0
};

/**
 * Reads originals (`id,time,followers`) and retweets (`original_id,time`) CSVs.
 * Times are shifted so the earliest original is at 0. Lines starting with '#'
 * are comments. Errors name the file row (1-based, header included).
 */
LoadedData load_cascade(std::istream& originals, std::istream& retweets, const LoadOptions& options = {});
LoadedData load_cascade(const std::filesystem::path& originals, const std::filesystem::path& retweets,
                        const LoadOptions& options = {});

/// "N originals, K retweeted, M retweets"
std::string summary_line(const EventCascade& cascade);

/// Writes the two input CSVs (numeric seconds, horizon comment). ids default to 0..n-1.
void write_cascade(std::ostream& originals, std::ostream& retweets, const EventCascade& cascade,
                   std::span<const std::string> ids = {});

/// original,x,m_star with m_star = log(1 + m_i).
void write_scatter_csv(std::ostream& out, const EventCascade& cascade, const Covariates& covariates);

struct DuaneSeries
{
    std::string name;
    std::vector<DuanePoint> points;
    FitResult fit;  // power-law fit giving the reference line
};

/// Duane series for the originals and for the retweets of the most-retweeted original.
std::vector<DuaneSeries> exploration_series(const EventCascade& cascade);

/// series,log_time,log_mtbf,reference
void write_duane_csv(std::ostream& out, std::span<const DuaneSeries> series);
/// series,lambda,gamma,slope,intercept,log_lik
void write_duane_lines_csv(std::ostream& out, std::span<const DuaneSeries> series);

/// iter,model,beta,kappa,lambda,phi,psi,tau,theta,log_lik (theta empty when absent)
void write_chain_csv(std::ostream& out, const Chain& chain);
/// draw,original,eps
void write_eps_csv(std::ostream& out, const Chain& chain);
/// Inverse of write_chain_csv / write_eps_csv (eps optional).
Chain read_chain_csv(std::istream& chain_csv, std::istream* eps_csv = nullptr);

/// draw,chi_sq_actual,chi_sq_simulated
void write_pairs_csv(std::ostream& out, std::span<const DiscrepancyPair> pairs);
/// original,id,observed,mean,lower,upper,widest
void write_intervals_csv(std::ostream& out, std::span<const PredictionInterval> intervals,
                         std::span<const std::string> ids = {});

/// %.17g
std::string format_double(double v);

} // namespace hnhpp
