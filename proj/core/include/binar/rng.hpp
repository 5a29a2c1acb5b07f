#pragma once

#include <cstdint>
#include <limits>
#include <utility>

#include "binar/model.hpp"

namespace binar {

/// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based random stream. Output i of a stream is a pure function of
/// (key, i), and the key is a pure function of (seed, stream id) and of the
/// ids passed to derive(). Trees and replicates are therefore reproducible
/// under any scheduling.
///
/// Satisfies UniformRandomBitGenerator, so it plugs into <random>/Boost
/// distributions.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
        : key_(mix64(seed ^ mix64(stream_id + 0x632BE59BD9B4E019ULL))) {}

    /// Child stream keyed by `id`; does not advance this stream.
    RngStream derive(std::uint64_t id) const noexcept {
        return RngStream(mix64(key_ ^ mix64(id + 0xD1B54A32D192ED03ULL)));
    }

    result_type operator()() noexcept { return mix64(key_ + mix64(++counter_)); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t draws() const noexcept { return counter_; }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

private:
    explicit RngStream(std::uint64_t key) noexcept : key_(key) {}

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Poisson draw; mean 0 gives 0.
std::int64_t sample_poisson(double mean, RngStream& rng);

/// a o x: sum of x i.i.d. offspring counts.
/// Bernoulli(p): one Binomial(x, p) draw (direct Bernoulli count for x <= 16,
/// Boost's binomial sampler above). Poisson(l): one Poisson(x l) draw.
std::int64_t thin(const OffspringFamily& family, std::int64_t x, RngStream& rng);

struct ImmigrationPair {
    std::int64_t even = 0;
    std::int64_t odd = 0;

    friend bool operator==(const ImmigrationPair&, const ImmigrationPair&) = default;
};

/// Draws (U + W1, U + W2) with three fresh Poisson variables.
ImmigrationPair sample_immigration_pair(const ImmigrationSpec& spec, RngStream& rng);

/// One coordinate of a fresh immigration pair (even when odd == false).
std::int64_t sample_immigration(const ImmigrationSpec& spec, bool odd, RngStream& rng);

}  // namespace binar
