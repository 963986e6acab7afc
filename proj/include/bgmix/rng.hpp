#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace bgmix {

/// Seeded generator plus the few distributions the augmentation engine draws from.
/// Streams are reproducible for a given standard library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    double uniform(double lo = 0.0, double hi = 1.0)
    {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    /// Integer in [lo, hi].
    int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

    std::size_t index(std::size_t n)
    {
        if (n == 0) throw std::invalid_argument("Rng::index on empty range");
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }

    bool coin(double p = 0.5) { return uniform() < p; }

    double normal(double mean = 0.0, double stddev = 1.0)
    {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }

    double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }

    double beta(double a, double b)
    {
        const double x = gamma(a);
        const double y = gamma(b);
        const double s = x + y;
        return s > 0.0 ? x / s : 0.5;
    }

    /// Symmetric Dirichlet(alpha * 1_k).
    std::vector<double> dirichlet(std::size_t k, double alpha)
    {
        std::vector<double> w(k);
        double s = 0.0;
        for (double& v : w) {
            v = gamma(alpha);
            s += v;
        }
        if (s <= 0.0) {
            for (double& v : w) v = 1.0 / static_cast<double>(k);
            return w;
        }
        for (double& v : w) v /= s;
        return w;
    }

    /// Derives an independent child seed, used for per-item streams.
    std::uint64_t next_seed() { return engine_(); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

} // namespace bgmix
