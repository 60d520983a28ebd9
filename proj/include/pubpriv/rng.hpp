#pragma once

#include <cstdint>

namespace pubpriv {

// Stream-addressed seed. Identical (root, stream) pairs replay identical
// draws on every platform and thread count; distinct streams are
// statistically independent. Parallel trials hand out disjoint streams
// instead of sharing generator state.
struct RngSeed {
    std::uint64_t root = 0;
    std::uint64_t stream = 0;
};

// Derive a child stream id from a parent. Hash-combine + splitmix64
// finalizer; chains of substream() calls stay well mixed.
RngSeed substream(RngSeed seed, std::uint64_t child) noexcept;

// xoshiro256** seeded through splitmix64 over (root, stream).
//
// Gaussian draws use one frozen transform: the trigonometric Box-Muller
// pair on 53-bit uniforms, second value cached. The transform is part of
// the replay contract; do not swap it for std::normal_distribution.
class Rng {
public:
    explicit Rng(RngSeed seed) noexcept;

    std::uint64_t next_u64() noexcept;

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() noexcept;

    // Standard normal via Box-Muller.
    double next_gaussian() noexcept;

    // Unbiased uniform integer in [0, bound); bound >= 1.
    std::uint64_t next_below(std::uint64_t bound) noexcept;

private:
    std::uint64_t state_[4];
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace pubpriv
