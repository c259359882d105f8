#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mirage {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

// All randomness flows from one master seed through named substreams
// (e.g. "channel", "codebook", "sweep") so partial reruns reproduce.
inline uint64_t derive_seed(uint64_t master, std::string_view stream, uint64_t index = 0) {
    uint64_t state = master ^ fnv1a64(stream);
    (void)splitmix64(state);
    state ^= index;
    (void)splitmix64(state);
    return splitmix64(state);
}

// Uniform double in [0, 1) with a platform-independent mapping.
inline double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace mirage
