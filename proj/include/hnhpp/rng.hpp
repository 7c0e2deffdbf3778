#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace hnhpp {

/**
 * xoshiro256** engine with deterministic substreams.
 *
 * Every random quantity in the library is drawn from a stream identified by
 * (seed, key, index). Streams are seeded by running splitmix64 over the mixed
 * triple, so per-original or per-draw work can be generated in any order (or
 * in parallel) and still reproduce bit-for-bit.
 *
 * Satisfies UniformRandomBitGenerator, so it plugs into <random> distributions.
 */
class Rng
{
  public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0x9e3779b97f4a7c15ULL);

    /// Independent stream keyed by (seed, key, index).
    static Rng substream(std::uint64_t seed, std::uint64_t key, std::uint64_t index = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on the open interval (0, 1).
    double uniform();

  private:
    std::uint64_t s_[4];
};

/// FNV-1a hash of a name; used to derive stream keys such as "fit" or "simulate".
std::uint64_t stream_key(std::string_view name);

/// splitmix64 finaliser.
std::uint64_t mix64(std::uint64_t x);

} // namespace hnhpp
