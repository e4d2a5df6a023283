#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace hcpi {

// Deterministic random stream with an explicit derivation path.
//
// A stream is identified by (master seed, path words); the engine seed is the
// splitmix64 chain over those values. Different paths give statistically
// independent streams, and the derivation is part of the reproducibility
// contract: stream(seed, {point, trial, role}) always produces the same draws
// regardless of platform or worker count.
//
// Gaussians come from an explicit Box-Muller transform on 53-bit uniforms so
// the draw sequence does not depend on the standard library's distribution
// implementation.
class RngStream {
public:
    explicit RngStream(std::uint64_t master, std::initializer_list<std::uint64_t> path = {}) {
        std::uint64_t s = splitmix64(master ^ 0x9e3779b97f4a7c15ull);
        for (std::uint64_t w : path) s = splitmix64(s ^ splitmix64(w + 0xbf58476d1ce4e5b9ull));
        eng_.seed(s);
    }

    std::uint64_t next_u64() { return eng_(); }

    // [0, 1) with 53 random bits
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // N(0, 1)
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform01();  // (0, 1], keeps log() finite
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // circularly-symmetric CN(0, variance)
    std::complex<double> complex_gaussian(double variance) {
        double s = std::sqrt(variance * 0.5);
        return {s * gaussian(), s * gaussian()};
    }

    std::uint32_t bit() { return static_cast<std::uint32_t>(eng_() >> 63); }

    // uniform in [0, n), n >= 1
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(eng_()) * n) >> 64);
    }

    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace hcpi
