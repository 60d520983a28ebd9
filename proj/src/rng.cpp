#include "pubpriv/rng.hpp"

#include <cmath>

namespace pubpriv {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t splitmix64_next(std::uint64_t& x) noexcept {
    x += kGolden;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_combine(std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t x = a ^ (b + kGolden + (a << 6) + (a >> 2));
    return splitmix64_next(x);
}

inline std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

} // namespace

RngSeed substream(RngSeed seed, std::uint64_t child) noexcept {
    return RngSeed{seed.root, mix_combine(seed.stream, child)};
}

Rng::Rng(RngSeed seed) noexcept {
    std::uint64_t sm = seed.root ^ (kGolden * (seed.stream + 1));
    for (auto& word : state_) {
        word = splitmix64_next(sm);
    }
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
        state_[0] = 1; // xoshiro state must not be all zero
    }
}

std::uint64_t Rng::next_u64() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::next_unit() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_gaussian() noexcept {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    double u1 = next_unit();
    const double u2 = next_unit();
    if (u1 <= 0.0) {
        u1 = 0x1.0p-53; // log(0) guard; keeps the draw finite
    }
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
}

std::uint64_t Rng::next_below(std::uint64_t bound) noexcept {
    // modulo with rejection below the wrap-around threshold
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) {
            return r % bound;
        }
    }
}

} // namespace pubpriv
