#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace trustshape {

/// Deterministic random stream.
///
/// The engine is std::mt19937_64 (bit-exact across implementations); the
/// variate transforms are implemented here because the standard library's
/// distribution objects are allowed to differ between toolchains, and
/// rollouts must replay identically for a given (seed, stream) pair.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : engine_(mix(mix(seed))) {}

    /// Substream `stream` of a master seed; distinct streams are
    /// statistically independent and order-insensitive.
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : engine_(mix(mix(seed) + 0x9e3779b97f4a7c15ull * (stream + 1))) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform draw in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    bool bernoulli(double p) {
        if (!(p >= 0.0) || !(p <= 1.0))
            throw std::invalid_argument("RngStream::bernoulli: p must lie in [0,1]");
        return uniform01() < p;
    }

    /// Standard normal via the polar method.
    double normal() {
        for (;;) {
            double u = 2.0 * uniform01() - 1.0;
            double v = 2.0 * uniform01() - 1.0;
            double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

    /// Gamma(shape, 1) via Marsaglia-Tsang squeeze, boosted for shape < 1.
    double gamma(double shape) {
        if (!(shape > 0.0)) throw std::invalid_argument("RngStream::gamma: shape must be positive");
        if (shape < 1.0) {
            double u = uniform01();
            while (u <= 0.0) u = uniform01();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            double v = t * t * t;
            double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        double x = gamma(a);
        double y = gamma(b);
        return x / (x + y);
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
};

}
