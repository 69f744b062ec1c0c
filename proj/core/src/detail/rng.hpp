#pragma once

#include <cstdint>
#include <random>

namespace rayloc::detail {

// Independent substream keyed by (seed, tag, a, b). Reproducible across
// platforms; the stream for one (user, trial) never depends on how many
// draws another stream consumed.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint32_t tag,
                                 std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
        tag,
        static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
        static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
    };
    return std::mt19937_64(seq);
}

}  // namespace rayloc::detail
