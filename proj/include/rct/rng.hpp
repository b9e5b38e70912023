#pragma once

#include <cstdint>
#include <string_view>

namespace rct {

/// SplitMix64 finalizer: a fixed 64-bit bijective mix.
std::uint64_t mix64(std::uint64_t z);

/// Counter-based deterministic generator. The i-th output is a pure
/// function mix64(key + i * golden), so a stream is fully determined by its
/// 64-bit key and is reproducible across platforms and call groupings.
/// Sub-streams are derived by hashing (key, label) or (key, index), which
/// lets independent components draw from decorrelated streams without
/// sharing mutable state.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53-bit resolution.
    double next_double();

    /// Standard normal via Box-Muller (two uniforms per call).
    double next_normal();

    /// Exponential with the given rate via inverse CDF.
    double next_exponential(double rate);

    /// Uniform on [lo, hi).
    double next_uniform(double lo, double hi);

    /// Derived stream for a labeled purpose; independent of this stream's counter.
    Rng stream(std::string_view label) const;

    /// Derived stream for an indexed purpose (per-particle, per-iteration, ...).
    Rng stream(std::uint64_t index) const;

    std::uint64_t key() const { return key_; }

private:
    Rng(std::uint64_t key, int);

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace rct
