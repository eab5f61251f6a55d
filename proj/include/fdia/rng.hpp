#ifndef FDIA_RNG_HPP
#define FDIA_RNG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace fdia {

// Deterministic generator with explicit state, identical output on every
// platform. std::mt19937 plus the standard distributions would tie results
// to one standard-library implementation, so uniforms and normals are
// produced here directly from the raw 64-bit stream (splitmix64 core).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1) with 53 random bits
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // unbiased integer in [0, n), n >= 1
    std::uint64_t uniform_index(std::uint64_t n) {
        // rejection sampling on the top bits
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    double normal(double mean = 0.0, double stddev = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + stddev * spare_;
        }
        // Box-Muller; u is kept away from 0 so log stays finite
        double u = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        double v = uniform01();
        double r = std::sqrt(-2.0 * std::log(u));
        double a = 6.283185307179586476925286766559 * v;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return mean + stddev * r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Sorted k-subset of {0, ..., universe-1}, uniform over all C(universe, k)
// subsets (partial Fisher-Yates).
inline std::vector<int> sample_index_subset(std::size_t universe, std::size_t count, Rng& rng) {
    if (count > universe)
        throw std::invalid_argument("sample_index_subset: count exceeds universe");
    std::vector<int> pool(universe);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(universe - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

// Derives an independent stream seed from (master, stream tag, index).
// Used to give every sample / grid cell its own generator so that serial
// and parallel evaluation orders produce identical results.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index = 0) {
    Rng mix(master ^ (stream * 0x9e3779b97f4a7c15ULL) ^ (index + 0x2545f4914f6cdd1dULL));
    mix.next_u64();
    return mix.next_u64();
}

} // namespace fdia

#endif
