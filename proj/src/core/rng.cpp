#include "aisf/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace aisf {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t Rng::mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
  : seed_(seed)
  , key_(mix64(seed ^ mix64(stream + kGamma)))
{ }

Rng Rng::fork(std::uint64_t id) const
{
    Rng child(seed_, 0);
    child.key_ = mix64(key_ ^ mix64(id * kGamma + 0x632BE59BD9B4E019ULL));
    return child;
}

std::uint64_t Rng::next_u64()
{
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
}

double Rng::uniform()
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi)
{
    return lo + (hi - lo) * uniform();
}

std::size_t Rng::below(std::size_t n)
{
    const auto bound = static_cast<std::uint64_t>(n);
    // Reject the top partial bucket so every residue is equally likely.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max()
        - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r = next_u64();
    while (r >= limit) {
        r = next_u64();
    }
    return static_cast<std::size_t>(r % bound);
}

double Rng::normal()
{
    double u1 = uniform();
    while (u1 <= 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace aisf
