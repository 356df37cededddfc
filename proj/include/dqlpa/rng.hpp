#pragma once

#include <cstdint>
#include <random>

namespace dqlpa {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for stream `stream` of item `index` under `master`. Results depend only on
/// the three inputs, so work can be fanned out without changing any draw.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index = 0) {
    return mix64(mix64(mix64(master) ^ (stream * 0x632be59bd9b4e019ULL)) ^ index);
}

enum class Stream : std::uint64_t {
    network_init = 1,
    training = 2,
    test_channel = 3,
    test_policy = 4,
    ga = 5,
    random_baseline = 6,
};

inline Rng make_rng(std::uint64_t master, Stream stream, std::uint64_t index = 0) {
    return Rng(derive_seed(master, static_cast<std::uint64_t>(stream), index));
}

// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace dqlpa
