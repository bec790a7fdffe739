#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace ipsim {

// 64-bit FNV-1a over a stream label.
constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

// One SplitMix64 scramble step.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Sub-stream derivation: a single user seed fans out to independent
// component streams keyed by a label, e.g. derive_seed(seed, "sim/noise").
// sub_seed = splitmix64(base XOR fnv1a64(label)).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view label) {
    return splitmix64(base ^ fnv1a64(label));
}

// Seeded RNG with hand-rolled distributions. std::normal_distribution and
// std::uniform_int_distribution are implementation-defined, so the draws
// here go straight to the (standardized) mt19937_64 stream instead; equal
// seeds give bit-identical sequences on any conforming toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller, cosine branch. Two uniforms per draw;
    // u1 is shifted into (0, 1] so the log never sees zero.
    double gaussian() {
        const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    // Uniform integer in [0, n). The modulo bias is far below anything our
    // shuffles and drop decisions can resolve.
    std::uint64_t bounded(std::uint64_t n) { return engine_() % n; }

private:
    static constexpr double kPi = 3.14159265358979323846;
    std::mt19937_64 engine_;
};

}  // namespace ipsim
