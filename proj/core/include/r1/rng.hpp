#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace r1 {

/// splitmix64 mixing step, used to derive well-separated seeds from a master
/// seed plus a path of integer labels.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_seed(std::uint64_t master,
                               std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(master);
    for (std::uint64_t p : path) h = mix64(h ^ mix64(p));
    return h;
}

/// Deterministic random stream. mt19937_64 is fully specified by the
/// standard; the Gaussian sampler is an explicit Box-Muller so that streams
/// are reproducible across standard library implementations
/// (std::normal_distribution is not pinned down by the standard).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent child stream addressed by (this stream's seed, path).
    static Rng derive(std::uint64_t master,
                      std::initializer_list<std::uint64_t> path) {
        return Rng(hash_seed(master, path));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform on [0, 1].  Used where an exact endpoint is harmless.
    double uniform_closed() {
        return static_cast<double>(engine_() >> 11) / 9007199254740991.0;
    }

    /// Integer in [0, bound) without modulo bias.
    std::uint64_t uniform_index(std::uint64_t bound) {
        std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            std::uint64_t r = engine_();
            if (r >= threshold) return r % bound;
        }
    }

    /// Standard normal via Box-Muller, one spare value cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Standard complex Gaussian with E|z|^2 = 1 (real and imaginary parts
    /// independent N(0, 1/2)).
    std::complex<double> complex_normal() {
        constexpr double inv_sqrt2 = 0.70710678118654752440;
        double re = normal() * inv_sqrt2;
        double im = normal() * inv_sqrt2;
        return {re, im};
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Rademacher sign, +1 or -1 with equal probability.
    int sign() { return (engine_() & 1ULL) ? 1 : -1; }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace r1
