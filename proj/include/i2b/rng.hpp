#pragma once
// Deterministic random number generation. All stochastic behavior in the
// pipeline (weight init, dropout, shuffles, synthetic data) flows through
// this engine so that a fixed seed reproduces results bitwise on any
// platform. std:: distributions are implementation-defined, hence avoided.

#include <cmath>
#include <cstdint>
#include <vector>

namespace i2b {

// xoshiro256** seeded via SplitMix64.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& si : s_) {
            // SplitMix64 step
            x += 0x9e3779b97f4a7c15ULL;
            uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            si = z ^ (z >> 31);
        }
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0,1) with 53 bits of precision.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo,hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0,n), unbiased via rejection.
    uint64_t uniform_int(uint64_t n) {
        if (n <= 1) return 0;
        const uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal, Box-Muller (one value cached).
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    double lognormal(double mu, double sigma) { return std::exp(mu + sigma * normal()); }

    // Pareto with scale x_m > 0 and shape alpha > 0.
    double pareto(double x_m, double alpha) {
        double u = 0.0;
        while (u == 0.0) u = uniform01();
        return x_m / std::pow(u, 1.0 / alpha);
    }

    // Poisson via Knuth's product method; adequate for the small means used here.
    uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform01();
        } while (p > limit);
        return k - 1;
    }

    // In-place Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Derive an independent child stream, e.g. one per worker or per epoch.
    Rng fork(uint64_t salt) { return Rng(next_u64() ^ (salt * 0x9e3779b97f4a7c15ULL)); }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t s_[4];
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace i2b
