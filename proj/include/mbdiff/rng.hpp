#pragma once

#include <cstdint>
#include <random>

namespace mbdiff {

// Deterministic random source. Wraps std::mt19937_64 (whose output sequence
// is fully specified by the standard) and derives uniform variates by hand,
// so results are identical across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform double in [0, 1).
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound) {
        // Rejection sampling on the top bits keeps the draw unbiased.
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t x = engine_();
            if (x >= threshold) return x % bound;
        }
    }

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

// 64-bit finalizer used for seed derivation (splitmix64 mixing step).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from a master seed, a stream tag and an
// index. Injective in `index` for fixed (master, tag): the inner expression
// is a bijection of index composed with the bijective mix64.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                                 std::uint64_t index) {
    return mix64(master ^ mix64(tag) ^ (0x2545F4914F6CDD1DULL * (index + 1)));
}

}  // namespace mbdiff
