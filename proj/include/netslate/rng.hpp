#pragma once
// Fixed, self-contained pseudo-random generator so that every artifact this
// project emits (datasets, folds, Monte Carlo sweeps) is reproducible
// byte-for-byte across platforms. Algorithm: SplitMix64 stream; doubles take
// the top 53 bits; normals via Box-Muller. Do not swap in std:: distributions,
// they are implementation-defined.

#include <cstdint>
#include <cmath>
#include <vector>

namespace netslate {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64_next(state_); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform integer in [0, n), n > 0; rejection keeps it exactly uniform
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do { x = next_u64(); } while (x >= limit);
        return x % n;
    }

    // standard normal via Box-Muller (both draws consumed, one returned;
    // keeping the single-draw form makes call sites order-independent)
    double normal() {
        double u1, u2;
        do { u1 = uniform(); } while (u1 <= 0.0);
        u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Rademacher +-1
    int sign() { return (next_u64() & 1u) ? 1 : -1; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

// Per-cell seed for Monte Carlo sweeps: a SplitMix64 hash chain over
// (base_seed, N, rep). Independent of worker scheduling.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t n, std::uint64_t rep) {
    std::uint64_t s = base_seed;
    std::uint64_t h = splitmix64_next(s);
    s = h ^ (n * 0xD1B54A32D192ED03ULL);
    h = splitmix64_next(s);
    s = h ^ (rep * 0xA24BAED4963EE407ULL);
    return splitmix64_next(s);
}

} // namespace netslate
