#pragma once

#include <cstdint>

namespace ecopf {

/// Stateless counter-based random stream. Every draw is a pure hash of
/// (seed, stream, counter), so results do not depend on evaluation order
/// or on how work is split across threads.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : state_(mix(mix(seed ^ 0x9e3779b97f4a7c15ULL, stream), 0x2545f4914f6cdd1dULL)) {}

    /// Uniform double in [0, 1) for draw index `counter`.
    double uniform_at(std::uint64_t counter) const {
        const std::uint64_t bits = mix(state_, counter);
        return static_cast<double>(bits >> 11) * 0x1.0p-53;
    }

    /// Next uniform double in [0, 1), advancing the internal counter.
    double uniform() { return uniform_at(counter_++); }

    /// Derive an independent child stream (e.g. one per scenario or node).
    CounterRng substream(std::uint64_t idx) const { return CounterRng(state_, idx + 1); }

    /// Stable 64-bit seed derivation for named substreams.
    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
        return mix(mix(seed, a), b);
    }

private:
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        // splitmix64 finalizer over the combined words
        std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_ = 0;
    std::uint64_t counter_ = 0;
};

} // namespace ecopf
