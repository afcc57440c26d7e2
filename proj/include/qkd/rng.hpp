// Seeded random source with a documented, stable derivation scheme for
// parallel streams. All randomness in the simulator flows through this
// class so that a (config, seed) pair reproduces a run bit-for-bit.

#pragma once

#include <cstdint>
#include <random>

namespace qkd {

// SplitMix64 finalizer. Stream r of a master seed s is
// mix(s + 0x9E3779B97F4A7C15 * (r + 1)); documented here and in the
// README because batch reproducibility depends on it.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) {
    return mix64(master + 0x9E3779B97F4A7C15ull * (counter + 1));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    static Rng derived(std::uint64_t master, std::uint64_t counter) {
        return Rng(derive_seed(master, counter));
    }

    // Next 64 random bits.
    std::uint64_t raw() { return gen_(); }

    int bit() { return static_cast<int>(raw() & 1u); }

    // Uniform double in [0, 1) with 53 significant bits. Avoids
    // std::uniform_real_distribution, whose output is not pinned by the
    // standard across library implementations.
    double real() { return static_cast<double>(raw() >> 11) * 0x1.0p-53; }

    // Uniform index in {0, ..., n-1}, unbiased via rejection.
    std::size_t index(std::size_t n) {
        const std::uint64_t m = static_cast<std::uint64_t>(n);
        const std::uint64_t reject_below = (0 - m) % m;  // 2^64 mod n
        std::uint64_t x = raw();
        while (x < reject_below) x = raw();
        return static_cast<std::size_t>(x % m);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace qkd
