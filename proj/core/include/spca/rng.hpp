#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace spca {

/// SplitMix64 finalizer. Bijective mixing of a 64-bit word.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: draw i of stream `seed` is splitmix64(seed ^ stream_key + i).
/// Stateless apart from the counter, so any port that reproduces splitmix64
/// and the Box-Muller transform below reproduces the same sequence.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL)) {}

  std::uint64_t next_u64() noexcept { return splitmix64(key_ + counter_++ * 0x9e3779b97f4a7c15ULL); }

  /// Uniform in (0, 1): top 53 bits, offset by half an ulp so 0 never occurs.
  double uniform() noexcept { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; consumes two uniforms per call (cosine branch only).
  double normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t r = next_u64();
    while (r >= limit) r = next_u64();
    return r % bound;
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace spca
