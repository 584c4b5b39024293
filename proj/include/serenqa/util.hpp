#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace serenqa {

// FNV-1a, used for cache keys. Not cryptographic; collisions only risk a
// spurious cache rebuild.
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t fnv1a64(std::string_view s, uint64_t seed = 0xcbf29ce484222325ull) {
    return fnv1a64(s.data(), s.size(), seed);
}

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

// Doubles drawn straight from mt19937_64 output so the stream is identical
// on every platform (std::uniform_real_distribution is not pinned by the
// standard).
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0,1)
}

inline double uniform_symmetric(std::mt19937_64& rng) {
    return 2.0 * uniform_unit(rng) - 1.0;
}

// Index-sharded parallel loop. Each index writes only its own state, so the
// result does not depend on the worker count.
void parallel_for(size_t n, unsigned workers, const std::function<void(size_t)>& body);

inline unsigned default_workers() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

}  // namespace serenqa
