#pragma once

#include <cstddef>
#include <cstdint>

namespace aisf {

/// Named substreams. Every stochastic step of the pipeline draws from its own
/// stream so that changing one consumer never perturbs another.
enum class Stream : std::uint64_t {
    kInit = 1,
    kWindows = 2,
    kSplit = 3,
    kShuffle = 4,
    kDropout = 5,
    kGenerator = 6,
    kGradCheck = 7,
};

/// SplitMix64 in counter mode.
///
/// The i-th output is `mix64(key + (i + 1) * 0x9E3779B97F4A7C15)`, where the
/// key is derived from (seed, stream). Only integer arithmetic is involved in
/// producing the raw 64-bit words, so sequences are identical on every
/// platform. Floating-point draws are built from the top 53 bits; normal
/// draws use Box-Muller on top of `uniform()`.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    /// Independent generator keyed by this generator's key and `id`.
    [[nodiscard]] Rng fork(std::uint64_t id) const;
    [[nodiscard]] Rng fork(Stream s) const { return fork(static_cast<std::uint64_t>(s)); }

    std::uint64_t next_u64();
    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n). Unbiased (rejection sampling). n must be > 0.
    std::size_t below(std::size_t n);
    /// Standard normal.
    double normal();

    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] std::uint64_t counter() const { return counter_; }

    static std::uint64_t mix64(std::uint64_t z);

private:
    std::uint64_t seed_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace aisf
