#ifndef RLCONGEST_PRNG_HPP
#define RLCONGEST_PRNG_HPP

#include <cstdint>

#include "rlcongest/types.hpp"

namespace rlc {

// Counter-based splittable generator (splitmix64 finalizer). Output is a pure
// function of (seed, counter), so any iteration order that fixes the counter
// sequence is reproducible bit-for-bit across platforms and thread counts.
class Prng {
public:
    explicit Prng(Word seed, Word stream = 0)
        : state_(mix(static_cast<std::uint64_t>(seed) ^
                     (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(stream) + 1)))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [0, bound), bound > 0. Modulo bias is irrelevant at desk scale.
    Word next_below(Word bound) { return static_cast<Word>(next_u64() % static_cast<std::uint64_t>(bound)); }

    // Derive an independent child generator; used to split per-graph, per-trial streams.
    Prng split(Word stream) const { return Prng(static_cast<Word>(state_), stream); }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

}  // namespace rlc

#endif
