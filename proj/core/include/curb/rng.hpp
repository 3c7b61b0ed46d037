#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace curb {

/// Seeded random stream handed explicitly to every stochastic operation.
///
/// Variates are produced from the raw 64-bit engine output with fixed
/// transforms (not std:: distributions) so a seed reproduces the same
/// numbers on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open0() { return 1.0 - uniform(); }

    /// Exp(1) variate.
    double exponential();

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    /// Independent child stream; deterministic in (this stream's seed, key).
    Rng substream(std::string_view key) const;
    Rng substream(std::uint64_t key) const;

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Stable 64-bit seed derived from a base seed and a string key (e.g. story id).
std::uint64_t derive_seed(std::uint64_t base, std::string_view key);

}  // namespace curb
