#pragma once

#include <cstdint>
#include <random>

namespace sdfplan {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent generator for (seed, stream, index); lets parallel loops draw
/// the same numbers regardless of scheduling.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
    return std::mt19937_64(splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index));
}

// Named streams so that stages never share random numbers.
namespace streams {
inline constexpr std::uint64_t kGpSample = 0x5a4d1e01;
inline constexpr std::uint64_t kEvalPoints = 0x5a4d1e02;
inline constexpr std::uint64_t kSynthesis = 0x5a4d1e03;
inline constexpr std::uint64_t kTraining = 0x5a4d1e04;
}  // namespace streams

}  // namespace sdfplan
