#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace hbt {

// Counter-based splittable generator built on the SplitMix64 output function
// (Steele, Lea & Flood 2014; fixed-increment variant by Vigna). The n-th
// output is mix64(key + n*GAMMA), so any position in a stream is addressable
// directly and chunked generation cannot change the sequence. Independent
// streams are derived from (seed, stream_label) and, for chunked generation,
// an additional chunk index.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view label)
        : key_(mix64(mix64(seed + kGolden) ^ fnv1a(label))), counter_(0) {}

    // Child stream, e.g. derive("det0").
    RngStream derive(std::string_view label) const {
        return RngStream(mix64(key_ ^ fnv1a(label)));
    }

    // Indexed child stream for per-chunk generation.
    RngStream derive(std::uint64_t index) const {
        return RngStream(mix64(key_ + (index + 1) * kGolden2));
    }

    std::uint64_t next_u64() {
        counter_ += 1;
        return mix64(key_ + counter_ * kGolden);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Standard normal via Box-Muller (no caching, so the draw count per call
    // is fixed and replay stays exact).
    double gaussian() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    double gaussian(double mean, double sigma) { return mean + sigma * gaussian(); }

    // Exponential with the given mean (mean = 0 degenerates to 0).
    double exponential(double mean) {
        if (mean <= 0.0) {
            uniform();  // keep the draw count independent of the parameter
            return 0.0;
        }
        return -mean * std::log1p(-uniform());
    }

    // Knuth's product method, chunked for large means via Poisson additivity.
    std::uint64_t poisson(double mean) {
        std::uint64_t n = 0;
        while (mean > 30.0) {
            n += poisson_small(30.0);
            mean -= 30.0;
        }
        return n + poisson_small(mean);
    }

    // Number of failures before the next success of a Bernoulli(p) sequence.
    // Used to skip non-emitting pulses when p is small.
    std::uint64_t geometric_skip(double p) {
        if (p >= 1.0) {
            uniform();
            return 0;
        }
        double u = 1.0 - uniform();  // (0, 1]
        double k = std::floor(std::log(u) / std::log1p(-p));
        if (k < 0.0) k = 0.0;
        if (k > 9.0e18) k = 9.0e18;
        return static_cast<std::uint64_t>(k);
    }

private:
    explicit RngStream(std::uint64_t key) : key_(key), counter_(0) {}

    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
    static constexpr std::uint64_t kGolden2 = 0xD1B54A32D192ED03ull;

    static std::uint64_t mix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        return h;
    }

    std::uint64_t poisson_small(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        std::uint64_t n = 0;
        double prod = uniform();
        while (prod > limit) {
            n += 1;
            prod *= uniform();
        }
        return n;
    }

    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace hbt
