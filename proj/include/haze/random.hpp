#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace haze {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Folds a list of words into one well-mixed seed. Used to derive independent
/// substreams such as (seed, day, iteration) so results never depend on the
/// order in which work is scheduled.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words) noexcept;

/// mt19937_64 with portable distributions; the standard library's distributions
/// are implementation-defined and would break byte-identical outputs across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n);
    /// Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi);
    bool bernoulli(double p) { return uniform01() < p; }
    /// Standard normal via Box-Muller.
    double normal();
    std::uint64_t poisson(double mean);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// k distinct indices drawn uniformly from [0, n), returned in ascending order.
/// `scratch` is reused between calls to avoid reallocation.
void sample_without_replacement(std::uint32_t n, std::uint32_t k, Rng& rng, std::vector<std::uint32_t>& scratch,
                                std::vector<std::uint32_t>& out);

}  // namespace haze
