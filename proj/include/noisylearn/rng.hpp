// Deterministic, splittable random number generation. Every stochastic
// routine in the library takes an explicit seed or Rng; nothing reads global
// state, so identical seeds give bit-identical results on any platform.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace noisylearn {

/**
 * SplitMix64 generator. Chosen over std::mt19937 because the standard
 * <random> distributions are not bit-reproducible across standard library
 * implementations; every variate transform below is implemented against the
 * raw 64-bit stream instead.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next_u64() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n); rejection keeps the draw unbiased.
    std::uint64_t below(std::uint64_t n) noexcept {
        std::uint64_t x, r;
        do {
            x = next_u64();
            r = x % n;
        } while (x - r > std::uint64_t(0) - n);
        return r;
    }

    int uniform_int(int lo, int hi_inclusive) noexcept {
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi_inclusive - lo) + 1));
    }

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    double normal() noexcept {
        double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

    /// Gamma(shape, 1) via Marsaglia-Tsang, with the usual boost for shape < 1.
    double gamma(double shape) {
        if (!(shape > 0.0)) throw std::invalid_argument("Rng::gamma: shape must be positive");
        if (shape < 1.0) {
            double u = 1.0 - uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            double v = t * t * t;
            double u = 1.0 - uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        double x = gamma(a);
        double y = gamma(b);
        if (x + y == 0.0) return 0.5;
        return x / (x + y);
    }

    /// Derives an independent substream; the parent state is not advanced.
    Rng fork(std::uint64_t stream) const noexcept {
        std::uint64_t z = state_ ^ (0x632be59bd9b4e019ull * (stream + 1));
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return Rng(z ^ (z >> 31));
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) noexcept {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace noisylearn
