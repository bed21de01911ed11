#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace wqf {

// Philox 4x32-10 counter-based generator (Salmon et al., SC 2011). Pure
// function of (counter, key): any single draw is reproducible in isolation,
// which is what makes partition-independent parallel Monte Carlo possible.
namespace philox {

inline constexpr std::uint32_t kM0 = 0xD2511F53u;
inline constexpr std::uint32_t kM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void round_once(std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                          std::array<std::uint32_t, 2> key) {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key[0] += kW0;
            key[1] += kW1;
        }
        round_once(counter, key);
    }
    return counter;
}

inline double to_unit_open(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t v = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(v >> 11) + 0.5) * (1.0 / 9007199254740992.0); // 2^-53
}

} // namespace philox

// One standard normal draw keyed on (seed, path, step, coordinate), via
// Box-Muller on two 53-bit uniforms from a single Philox block.
inline double standard_normal(std::uint64_t seed, std::uint64_t path_index, std::uint32_t step,
                              std::uint32_t coord) {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(path_index),
        static_cast<std::uint32_t>(path_index >> 32),
        step,
        coord,
    };
    const std::array<std::uint32_t, 2> key = {
        static_cast<std::uint32_t>(seed),
        static_cast<std::uint32_t>(seed >> 32),
    };
    const auto r = philox::block(ctr, key);
    const double u1 = philox::to_unit_open(r[0], r[1]);
    const double u2 = philox::to_unit_open(r[2], r[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

} // namespace wqf
