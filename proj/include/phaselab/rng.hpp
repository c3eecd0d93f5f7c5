#ifndef PHASELAB_RNG_HPP
#define PHASELAB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace phaselab {

/// 64-bit seed value. Seeds are first-class so every random effect in the
/// toolkit is reproducible from the numbers printed in a run's provenance.
struct Seed {
    std::uint64_t value = 0;
};

/// SplitMix64 mixing step. Fixed algorithm, stable across platforms and
/// releases; published seeds must keep reproducing published audio.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// FNV-1a 64-bit hash of a byte string. Same stability contract as splitmix64.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Derive a child seed from a parent seed and a string identifier.
inline Seed derive_seed(Seed parent, std::string_view id) {
    return Seed{splitmix64(splitmix64(parent.value) ^ fnv1a64(id))};
}

/// Derive a child seed from a parent seed and an integer salt.
inline Seed derive_seed(Seed parent, std::uint64_t salt) {
    return Seed{splitmix64(splitmix64(parent.value) ^ splitmix64(~salt))};
}

/// Deterministic random stream. The engine (mt19937_64) is fully specified by
/// the C++ standard; the uniform and Gaussian transforms below are written out
/// explicitly because the std::* distributions are implementation-defined.
class Rng {
public:
    explicit Rng(Seed seed) : engine_(seed.value) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller. Two engine draws per value.
    double gaussian() {
        double u1 = 1.0 - uniform(); // (0, 1], keeps log() finite
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace phaselab

#endif
