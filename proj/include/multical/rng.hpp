#pragma once

#include <cmath>
#include <cstdint>

namespace multical {

// Counter-based PRNG. Every draw is a pure function of (seed, stream,
// counter), so generating row i never depends on how many rows were
// generated before it and fixtures stay stable when n changes.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 0x2545f4914f6cdd1dULL));
}

inline double u64_to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : key_(mix_key(seed, stream)) {}

    std::uint64_t bits(std::uint64_t counter) const { return splitmix64(key_ ^ splitmix64(counter)); }

    // uniform in [0, 1)
    double uniform(std::uint64_t counter) const { return u64_to_unit(bits(counter)); }

    bool bernoulli(std::uint64_t counter, double p = 0.5) const { return uniform(counter) < p; }

    // standard normal via Box-Muller on counters (2*counter, 2*counter+1)
    double normal(std::uint64_t counter) const {
        double u1 = u64_to_unit(bits(2 * counter));
        double u2 = u64_to_unit(bits(2 * counter + 1));
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t key_;
};

// Stateful convenience wrapper over CounterRng for sequential draws
// (shuffles, subsampling). Same determinism guarantees.
class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint64_t stream = 0) : rng_(seed, stream) {}

    std::uint64_t next_bits() { return rng_.bits(counter_++); }
    double next_uniform() { return u64_to_unit(next_bits()); }

    // unbiased-enough bounded draw (fixed-point multiply, no rejection loop)
    std::uint64_t next_below(std::uint64_t bound) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_bits()) * bound) >> 64);
    }

    template <typename T>
    void shuffle(T* data, std::size_t n) {
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            T tmp = data[i - 1];
            data[i - 1] = data[j];
            data[j] = tmp;
        }
    }

private:
    CounterRng rng_;
    std::uint64_t counter_ = 0;
};

}  // namespace multical
