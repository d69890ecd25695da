#pragma once
// Counter-based random streams built on Philox 4x32-10.
//
// Every draw is addressed by (seed, purpose, replica, particle, index), so any
// thread can reproduce any value without shared state.  This is what makes the
// simulators independent of worker count and lets a coarse-step run share its
// Brownian path with a refined run (see noise_substeps in the SDE configs).

#include <cstdint>
#include <cmath>

namespace socdyn {

// ---------- Philox core ----------

namespace detail {

inline constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline uint64_t splitmix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace detail

struct PhiloxBlock {
    uint32_t c[4];
};

// 10-round Philox 4x32 keyed by a 64-bit key.
inline PhiloxBlock philox4x32(PhiloxBlock ctr, uint64_t key) {
    uint32_t k0 = static_cast<uint32_t>(key);
    uint32_t k1 = static_cast<uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
        const uint64_t p0 = static_cast<uint64_t>(detail::kPhiloxM0) * ctr.c[0];
        const uint64_t p1 = static_cast<uint64_t>(detail::kPhiloxM1) * ctr.c[2];
        const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32);
        const uint32_t lo0 = static_cast<uint32_t>(p0);
        const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32);
        const uint32_t lo1 = static_cast<uint32_t>(p1);
        ctr = PhiloxBlock{{hi1 ^ ctr.c[1] ^ k0, lo1, hi0 ^ ctr.c[3] ^ k1, lo0}};
        k0 += detail::kPhiloxW0;
        k1 += detail::kPhiloxW1;
    }
    return ctr;
}

// ---------- stream addressing ----------

// Distinct salts keep logically separate uses of the same seed uncorrelated.
enum class StreamPurpose : uint64_t {
    init_state   = 0x243F6A8885A308D3ull,
    path_noise   = 0x13198A2E03707344ull,
    limit_noise  = 0xA4093822299F31D0ull,
    proposal     = 0x082EFA98EC4E6C89ull,
    accept       = 0x452821E638D01377ull,
    oracle       = 0xBE5466CF34E90C6Cull,
};

inline uint64_t stream_key(uint64_t seed, StreamPurpose purpose) {
    return detail::splitmix64(seed ^ static_cast<uint64_t>(purpose));
}

inline PhiloxBlock stream_block(uint64_t key, uint64_t replica, uint64_t particle,
                                uint64_t index) {
    PhiloxBlock ctr{{static_cast<uint32_t>(index), static_cast<uint32_t>(index >> 32),
                     static_cast<uint32_t>(particle), static_cast<uint32_t>(replica)}};
    return philox4x32(ctr, key);
}

// ---------- draw types ----------

inline double u64_to_unit(uint64_t bits) {
    // 53 significant bits, result in [0,1).
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Uniform in [0,1); one Philox block per draw.
inline double uniform01(uint64_t key, uint64_t replica, uint64_t particle, uint64_t index) {
    const PhiloxBlock b = stream_block(key, replica, particle, index);
    const uint64_t bits = (static_cast<uint64_t>(b.c[0]) << 32) | b.c[1];
    return u64_to_unit(bits);
}

struct GaussPair {
    double z0, z1;
};

// Box-Muller pair from one block.  gaussian fine-index k maps to
// block k>>1, lane k&1, so sequential consumers can cache the odd lane.
inline GaussPair gauss_pair(uint64_t key, uint64_t replica, uint64_t particle,
                            uint64_t block_index) {
    const PhiloxBlock b = stream_block(key, replica, particle, block_index);
    const uint64_t ua = (static_cast<uint64_t>(b.c[0]) << 32) | b.c[1];
    const uint64_t ub = (static_cast<uint64_t>(b.c[2]) << 32) | b.c[3];
    // u in (0,1] keeps the log finite; v in [0,1).
    const double u = static_cast<double>((ua >> 11) + 1) * 0x1.0p-53;
    const double v = u64_to_unit(ub);
    const double r = std::sqrt(-2.0 * std::log(u));
    const double angle = 6.283185307179586476925286766559 * v;
    return GaussPair{r * std::cos(angle), r * std::sin(angle)};
}

inline double gaussian_at(uint64_t key, uint64_t replica, uint64_t particle,
                          uint64_t fine_index) {
    const GaussPair g = gauss_pair(key, replica, particle, fine_index >> 1);
    return (fine_index & 1) ? g.z1 : g.z0;
}

} // namespace socdyn
