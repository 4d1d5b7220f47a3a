#pragma once

#include <cstdint>
#include <string_view>

// Deterministic random primitives. Everything seeded in this project goes
// through SplitMix64 + FNV-1a so that schedules, mock decisions and random
// confidence draws are bit-exact across platforms and releases. std::shuffle
// and std::uniform_*_distribution are implementation-defined and must not be
// used anywhere results are persisted.

namespace mtc::rng {

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

// SplitMix64 finalizer as a stateless scrambler.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    // Uniform double in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

// One-shot uniform in [0, 1) from a hash value.
inline double hash_to_unit(std::uint64_t h) {
    return static_cast<double>(mix64(h) >> 11) * 0x1.0p-53;
}

}  // namespace mtc::rng
