#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace hnhpp {

struct CommandOptions
{
    std::string command;  // explore, mle, fit, select, diagnose, simulate
    std::string originals;
    std::string retweets;
    std::string config;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> model;
    std::optional<int> chains;
    std::optional<std::string> horizon;
    std::string time_format = "auto";
};

/// Seed for one subcommand: the config seed mixed with the command name, so
/// different subcommands never share random streams.
std::uint64_t command_seed(std::uint64_t seed, std::string_view command);

/// Runs one subcommand, writing artifacts under out_dir and a short report to
/// `out`. Throws ValidationError / NumericalError.
void run_command(const CommandOptions& options, std::ostream& out);

/// Parses argv and runs the command. Returns the process exit status:
/// 0 success, 2 validation error, 3 numerical failure; errors are one line on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace hnhpp
