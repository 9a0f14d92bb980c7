#pragma once

#include <cstdint>
#include <random>

namespace regdp {

/// Seeded generator with platform-independent output. std::mt19937_64 is
/// fully specified by the standard, but the standard distributions are not,
/// so the conversions to doubles and indices are done here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform on {0, ..., n-1}; n must be positive.
    std::uint64_t index(std::uint64_t n) { return engine_() % n; }

    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
};

}  // namespace regdp
