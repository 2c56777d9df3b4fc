#pragma once

#include <cstdint>
#include <random>

namespace branchrl {

/// Deterministic random source shared by every stochastic routine.
///
/// The engine is std::mt19937_64 (fully specified by the C++ standard, so the
/// raw stream is identical across compilers). Derived draws are defined here
/// rather than through <random> distributions, whose algorithms are
/// implementation-defined:
///   uniform01()  = (next() >> 11) * 2^-53, in [0, 1)
///   below(n)     = rejection sampling on the top of the 64-bit range
/// Replication i of a master seed uses the stream seeded with (seed ^ i).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % n;
    }

    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
};

inline std::uint64_t replication_seed(std::uint64_t master, std::uint64_t run) { return master ^ run; }

}  // namespace branchrl
