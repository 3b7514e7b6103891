#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

#include "frel/grid.hpp"

namespace frel {

// Per-check stream seed: FNV-1a over (suite, check, index), folded into the
// global seed and finished with splitmix64.
inline std::uint64_t split_seed(std::uint64_t seed, std::string_view suite, std::string_view check,
                                std::uint64_t index = 0) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](unsigned char c) {
        h ^= c;
        h *= 1099511628211ull;
    };
    for (char c : suite) mix(static_cast<unsigned char>(c));
    mix(0x1f);
    for (char c : check) mix(static_cast<unsigned char>(c));
    mix(0x1f);
    for (int b = 0; b < 8; ++b) mix(static_cast<unsigned char>(index >> (8 * b)));
    std::uint64_t z = seed ^ h;
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Distributions are written out by hand so that streams are identical across
// standard library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    std::uint64_t bits() { return eng_(); }

  private:
    std::mt19937_64 eng_;
};

// Random trigonometric polynomial with wavenumbers up to kmax / scale, times
// a Gaussian envelope exp(-(x/width)^2). Normalized to unit sup norm.
inline GridFunction random_band_limited(const Grid& g, Rng& rng, int kmax = 6, double scale = 2.0,
                                        double width = 3.0) {
    std::vector<double> a(kmax + 1), b(kmax + 1);
    for (int k = 0; k <= kmax; ++k) {
        a[k] = rng.normal() / (1.0 + k);
        b[k] = k == 0 ? 0.0 : rng.normal() / (1.0 + k);
    }
    auto f = GridFunction::sample(g, [&](double x) {
        double v = 0.0;
        for (int k = 0; k <= kmax; ++k) v += a[k] * std::cos(k * x / scale) + b[k] * std::sin(k * x / scale);
        const double z = x / width;
        return v * std::exp(-z * z);
    });
    const double mx = max_abs(f);
    return mx > 0.0 ? (1.0 / mx) * f : f;
}

}  // namespace frel
