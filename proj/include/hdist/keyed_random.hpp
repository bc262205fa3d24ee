#pragma once
//
// Counter-based uniform [-1, 1] generator.  An entry is a pure function of its
// key, so any rank can generate exactly its own shard of a block.
//

#include <cstdint>
#include <vector>

namespace hdist {

enum class FactorTag : std::uint64_t { Dense = 1, U = 2, V = 3 };

inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t combine64(std::uint64_t h, std::uint64_t v) {
    return mix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

/// Uniform in [-1, 1) keyed on (seed, block, factor, row, col).
inline double keyed_uniform(std::uint64_t seed, std::uint64_t block_key, FactorTag tag, std::int64_t row,
                            std::int64_t col) {
    std::uint64_t h = mix64(seed);
    h = combine64(h, block_key);
    h = combine64(h, static_cast<std::uint64_t>(tag));
    h = combine64(h, static_cast<std::uint64_t>(row));
    h = combine64(h, static_cast<std::uint64_t>(col));
    return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
}

/// Random vector with entries uniform in [-1, 1), drawn from mt19937_64.
std::vector<double> random_vector(std::int64_t length, std::uint64_t seed);

} // namespace hdist
