#include "hdist/keyed_random.hpp"

#include <random>

namespace hdist {

std::vector<double> random_vector(std::int64_t length, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<double> v(static_cast<std::size_t>(length));
    for (auto& x : v) x = static_cast<double>(gen() >> 11) * 0x1.0p-52 - 1.0;
    return v;
}

} // namespace hdist
