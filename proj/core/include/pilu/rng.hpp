#pragma once

#include <cstdint>
#include <random>

namespace pilu {

/// Independent random streams of one run. Each stream is seeded from
/// (run seed, stream id), so consuming one never shifts another.
enum class Stream : std::uint32_t { Init = 1, Shuffle = 2, Dropout = 3, Data = 4, Sampling = 5 };

using Rng = std::mt19937_64;

inline Rng make_stream(std::uint64_t seed, Stream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return Rng(seq);
}

}  // namespace pilu
