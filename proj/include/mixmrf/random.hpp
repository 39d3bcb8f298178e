#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace mixmrf {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed and stream indices.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ splitmix64(a + 0x1000));
    h = splitmix64(h ^ splitmix64(b + 0x2000));
    h = splitmix64(h ^ splitmix64(c + 0x3000));
    return h;
}

// Deterministic RNG: mt19937_64 (bit-exact across platforms) plus hand-rolled
// distributions, since the std:: distributions are implementation-defined and
// would break byte-identical reproducibility guarantees.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    /// Uniform on [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in {0, ..., n-1}.
    int uniform_int(int n) {
        int k = static_cast<int>(uniform() * n);
        return k >= n ? n - 1 : k;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller (second value discarded to keep the
    /// draw count per call fixed).
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Exponential with given rate (> 0).
    double exponential(double rate) {
        return -std::log(1.0 - uniform()) / rate;
    }

    /// Poisson draw; Knuth's product method in chunks so large means stay exact.
    long poisson(double lambda) {
        long total = 0;
        while (lambda > 30.0) {
            total += poisson_knuth(30.0);
            lambda -= 30.0;
        }
        return total + poisson_knuth(lambda);
    }

    /// Index draw from unnormalized nonnegative weights.
    int categorical(const Eigen::VectorXd& weights) {
        double total = weights.sum();
        double u = uniform() * total;
        double acc = 0.0;
        for (int i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return static_cast<int>(weights.size()) - 1;
    }

    /// Fisher-Yates shuffle of indices 0..n-1.
    std::vector<int> permutation(int n) {
        std::vector<int> idx(n);
        for (int i = 0; i < n; ++i) idx[i] = i;
        for (int i = n - 1; i > 0; --i) {
            int j = uniform_int(i + 1);
            std::swap(idx[i], idx[j]);
        }
        return idx;
    }

private:
    long poisson_knuth(double lambda) {
        if (lambda <= 0.0) return 0;
        const double limit = std::exp(-lambda);
        long k = 0;
        double prod = uniform();
        while (prod > limit) {
            ++k;
            prod *= uniform();
        }
        return k;
    }

    std::mt19937_64 engine_;
};

}  // namespace mixmrf
