#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace psfg {

// splitmix64 step (Steele/Lea/Flood). Used for seed expansion and derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Sub-stream derivation: derive_seed(master, i) is the seed of user i,
// derive_seed(base, tag) with a large constant tag names an auxiliary stream.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    return splitmix64(base ^ tag);
}

// Deterministic generator: xoshiro256++ (Blackman/Vigna), state seeded by
// four successive splitmix64 outputs. Same seed gives the same stream on
// every run and in every process.
//
// Float conventions (fixed, relied on for bit-exact replay):
//   - uniform01() uses the high 24 bits of one 64-bit output.
//   - fill_normal() is Box-Muller in strict pair order over the flat output
//     sequence; nothing is cached across calls, the second member of a
//     trailing odd pair is discarded.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // [0, 1) with 24-bit resolution.
    float uniform01() {
        return static_cast<float>(next() >> 40) * (1.0f / 16777216.0f);
    }

    // [lo, hi)
    float uniform(float lo, float hi) {
        return lo + (hi - lo) * uniform01();
    }

    // [0, n) via 64x64 multiply-high; n must be nonzero.
    std::uint64_t bounded(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // Standard normals, Box-Muller. out[2i] = r cos(theta), out[2i+1] = r sin(theta)
    // with r = sqrt(-2 ln u1), theta = 2 pi u2, u1 in (0,1]. Intermediate math in
    // binary64, results rounded to binary32.
    void fill_normal(std::span<float> out) {
        std::size_t i = 0;
        while (i < out.size()) {
            const double u1 = 1.0 - static_cast<double>(uniform01());
            const double u2 = static_cast<double>(uniform01());
            const double r = std::sqrt(-2.0 * std::log(u1));
            const double theta = 2.0 * std::numbers::pi * u2;
            out[i++] = static_cast<float>(r * std::cos(theta));
            if (i < out.size()) {
                out[i++] = static_cast<float>(r * std::sin(theta));
            }
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    std::uint64_t seed_;
};

// Named auxiliary streams hanging off the master seed. Values are arbitrary
// large constants; they only need to be fixed and distinct.
namespace seed_tag {
inline constexpr std::uint64_t data_train = 0x646174615f747261ULL;
inline constexpr std::uint64_t data_test = 0x646174615f746573ULL;
inline constexpr std::uint64_t cloud_split = 0x636c6f75645f7370ULL;
inline constexpr std::uint64_t shard_split = 0x73686172645f7370ULL;
inline constexpr std::uint64_t server = 0x7365727665725f72ULL;
inline constexpr std::uint64_t classifier = 0x636c617373696669ULL;
inline constexpr std::uint64_t judge = 0x6a756467655f7472ULL;
// Per-user sub-streams derived from the user's secret seed. The generator is
// initialized from the secret seed itself so a seed-holder can reproduce it.
inline constexpr std::uint64_t client_disc = 0x64697363725f696eULL;
inline constexpr std::uint64_t client_data = 0x636c69656e745f64ULL;
} // namespace seed_tag

} // namespace psfg
