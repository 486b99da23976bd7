#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace factormi {

// Seeded RNG with hand-rolled distributions so that streams are identical
// across standard libraries (std::*_distribution is implementation-defined).
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal, Box-Muller without state
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // [0, n), unbiased via rejection
    int uniform_int(int n) {
        uint64_t bound = static_cast<uint64_t>(n);
        uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return static_cast<int>(x % bound);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
            std::swap(v[static_cast<size_t>(i)], v[static_cast<size_t>(uniform_int(i + 1))]);
        }
    }

    // splitmix64 step, for deriving independent per-fold / per-purpose seeds
    static uint64_t derive(uint64_t master, uint64_t stream) {
        uint64_t z = master + 0x9e3779b97f4a7c15ull * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace factormi
