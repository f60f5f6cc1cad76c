#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

/// Counter-based random numbers: every draw is a pure function of its key,
/// so streams can be split by (seed, path, step, component) without state.
namespace rbm::rng {

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash(std::uint64_t a, std::uint64_t b) noexcept {
    return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t hash(std::uint64_t a, std::uint64_t b, std::uint64_t c) noexcept {
    return hash(hash(a, b), c);
}

constexpr std::uint64_t hash(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                             std::uint64_t d) noexcept {
    return hash(hash(hash(a, b), c), d);
}

/// Uniform on the open interval (0, 1).
inline double uniform(std::uint64_t h) noexcept {
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal from a key via Box-Muller on two derived uniforms.
inline double normal(std::uint64_t key) noexcept {
    const double u1 = uniform(splitmix64(key));
    const double u2 = uniform(splitmix64(key ^ 0xd1b54a32d192ed03ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Seed of the path with the given index under a master seed.
constexpr std::uint64_t path_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return hash(master, index, 0x5eedULL);
}

// Stream tags separating independent uses of one driver seed.
inline constexpr std::uint64_t kIncrementStream = 1;
inline constexpr std::uint64_t kBridgeStream = 2;
inline constexpr std::uint64_t kMinimumStream = 3;

}  // namespace rbm::rng
