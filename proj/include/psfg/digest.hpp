#pragma once

#include <cstdint>
#include <cstring>
#include <span>

namespace psfg {

// FNV-1a, 64-bit. Used for architecture digests, parameter digests, and
// trajectory hashes. Not cryptographic; collision resistance is not a goal.
inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                             std::uint64_t h = kFnvOffset) {
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= kFnvPrime;
    }
    return h;
}

template <typename T>
std::uint64_t fnv1a64_value(const T& v, std::uint64_t h = kFnvOffset) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::uint8_t buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    return fnv1a64(std::span<const std::uint8_t>(buf, sizeof(T)), h);
}

inline std::uint64_t fnv1a64_floats(std::span<const float> values,
                                    std::uint64_t h = kFnvOffset) {
    for (float f : values) {
        h = fnv1a64_value(f, h);
    }
    return h;
}

} // namespace psfg
