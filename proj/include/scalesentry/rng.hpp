#pragma once

#include <cstdint>
#include <random>

namespace scalesentry {

/// Independent randomness streams fanned out from one seed.
enum class Stream : std::uint64_t {
    ip_pool = 1,
    arrivals = 2,
    log_corruption = 3,
    split = 4,
    tree = 5,
};

/// splitmix64 finalizer; used to derive child seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Deterministic child seed of `parent` for index `index`.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept;
std::uint64_t derive_seed(std::uint64_t parent, Stream stream) noexcept;

/// Thin wrapper over mt19937_64 with distribution code that does not depend on
/// the standard library's (implementation-defined) distributions, so streams are
/// identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);
    /// Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi);
    /// Uniform double in [0, 1) with 53 random bits.
    double unit();
    bool chance(double p) { return unit() < p; }

private:
    std::mt19937_64 engine_;
};

}  // namespace scalesentry
