#pragma once

#include <cstdint>

namespace retq {

/// Counter-based pseudo-random generator. Every value is a pure function of
/// (seed, counter), so independent streams can be generated in any order or
/// in parallel and still produce identical output.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t counter) const {
        return mix(seed_ + kGolden * (counter + 1));
    }

    /// Uniform double in [0, 1).
    double uniform(std::uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    bool bernoulli(std::uint64_t counter, double p) const {
        return uniform(counter) < p;
    }

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t counter, std::uint64_t bound) const {
        std::uint64_t v = static_cast<std::uint64_t>(uniform(counter) * static_cast<double>(bound));
        return v >= bound ? bound - 1 : v;
    }

    /// Seed for a derived stream (per-world, per-start, ...).
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        return mix(mix(seed ^ 0x6A09E667F3BCC909ull) + kGolden * (stream + 1));
    }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

    // splitmix64 finalizer
    static constexpr std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t seed_;
};

} // namespace retq
