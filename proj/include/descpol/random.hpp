#pragma once

#include <cstdint>
#include <random>

namespace descpol {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; maps (base seed, stream id) to well-separated generator seeds.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stream ids used by the experiment runner. Environment draws are shared across
// policies; each policy owns its own exploration stream.
enum class Stream : std::uint64_t {
    environment = 1,
    descriptive = 2,
    conventional = 3,
    baseline = 4,
    tie_break = 5,
    evaluation = 6,
    pretrain = 7,
};

constexpr std::uint64_t derive_seed(std::uint64_t base, Stream stream) {
    return derive_seed(base, static_cast<std::uint64_t>(stream));
}

}  // namespace descpol
