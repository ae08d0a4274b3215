#pragma once

#include <cstdint>
#include <random>

namespace riskgate {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Named random streams of one run.
enum class Stream : std::uint64_t { demand = 1, accidents_a = 2, accidents_b = 3, forecast = 4 };

/**
 * Engine for stream `s` of the run seeded with `seed`.
 *
 * Streams are a pure function of (seed, stream id), so adding runs or
 * streams never perturbs existing ones.
 */
inline std::mt19937_64 make_stream(std::uint64_t seed, Stream s) {
    const std::uint64_t k = splitmix64(splitmix64(seed) ^ (static_cast<std::uint64_t>(s) * 0xD1B54A32D192ED03ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32),
                      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace riskgate
