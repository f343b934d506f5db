#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>

#include "swhawkes/core.hpp"

namespace swhawkes {

// splitmix64, used for seeding and for deriving independent stream seeds.
struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

// Stream splitting: feed the root seed and a path of integer tags through
// splitmix64.  Disjoint tag paths give independent streams, which is how the
// study harness assigns one stream per (cell, replicate).
inline std::uint64_t derive_seed(std::uint64_t root,
                                 std::initializer_list<std::uint64_t> path) {
    SplitMix64 sm{root};
    std::uint64_t out = sm.next();
    for (std::uint64_t tag : path) {
        SplitMix64 mix{out ^ (tag + 0x9E3779B97F4A7C15ULL)};
        out = mix.next();
    }
    return out;
}

// xoshiro256++ with distribution code written out so that draws are
// bit-reproducible across standard libraries and platforms.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        SplitMix64 sm{seed};
        for (auto& word : state_) word = sm.next();
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double exponential(double rate) {
        // -log of a (0,1] variate; never returns inf
        return -std::log(1.0 - uniform()) / rate;
    }

    long long poisson(double lambda) {
        if (!(lambda >= 0.0))
            throw Error(ErrorCode::NegativeRate, "poisson rate must be nonnegative");
        if (lambda == 0.0) return 0;
        if (lambda < 10.0) return poisson_knuth(lambda);
        return poisson_ptrs(lambda);
    }

    // index draw from a probability vector; the final bucket absorbs rounding
    int categorical(std::span<const double> probs) {
        const double u = uniform();
        double cum = 0.0;
        for (size_t i = 0; i + 1 < probs.size(); ++i) {
            cum += probs[i];
            if (u < cum) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    long long poisson_knuth(double lambda) {
        const double limit = std::exp(-lambda);
        long long k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

    // Hormann's PTRS transformed rejection, exact for lambda >= 10.
    long long poisson_ptrs(double lambda) {
        const double slam = std::sqrt(lambda);
        const double loglam = std::log(lambda);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        while (true) {
            const double u = uniform() - 0.5;
            const double v = uniform();
            const double us = 0.5 - std::abs(u);
            const auto k = static_cast<long long>(
                std::floor((2.0 * a / us + b) * u + lambda + 0.43));
            if (us >= 0.07 && v <= vr) return k;
            if (k < 0 || (us < 0.013 && v > us)) continue;
            if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
                static_cast<double>(k) * loglam - lambda -
                    std::lgamma(static_cast<double>(k) + 1.0))
                return k;
        }
    }

    std::uint64_t state_[4];
};

}  // namespace swhawkes
