#pragma once

#include <cstdint>

namespace ringdist {

// SplitMix64 finalizer: bijective 64-bit mix with good avalanche.
inline std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based generator: output k is mix64(seed + k*gamma), so the stream
// is a pure function of (seed, counter) with no hidden state.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_unit() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

// Stream seed for one replicate of one simulation cell. Pure function of its
// arguments, so replicates may run in any order or on any thread.
inline std::uint64_t derive_seed(std::uint64_t master_seed,
                                 std::uint64_t cell_index,
                                 std::uint64_t replicate_index) noexcept {
    std::uint64_t h = master_seed;
    h = mix64(h + 0x9e3779b97f4a7c15ULL * (cell_index + 1));
    h = mix64(h + 0x9e3779b97f4a7c15ULL * (replicate_index + 1));
    return h;
}

}  // namespace ringdist
