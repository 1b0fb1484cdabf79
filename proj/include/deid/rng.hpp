#pragma once

#include <cstdint>
#include <string_view>

namespace deid {

/// Deterministic 64-bit generator (splitmix64). Used everywhere instead of
/// <random> engines/distributions so identical seeds give byte-identical
/// output on every platform and standard library.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Uniform integer in [lo, hi], inclusive.
    std::uint64_t next_in(std::uint64_t lo, std::uint64_t hi) { return lo + next_below(hi - lo + 1); }

private:
    std::uint64_t state_;
};

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// Per-note RNG stream: independent of note order, stable across runs.
inline SplitMix64 note_stream(std::uint64_t seed, std::string_view note_id) {
    return SplitMix64(seed ^ fnv1a64(note_id));
}

}  // namespace deid
