#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace apd {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
///   z += 0x9E3779B97F4A7C15
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: draw number c of stream (seed, stream_id) is
///   splitmix64(key + c * 0x9E3779B97F4A7C15),  key = splitmix64(seed ^ splitmix64(stream_id)).
/// Any (seed, stream_id, counter) triple can be reproduced in any language from these constants.
///
/// Uniforms use the top 53 bits: u = (x >> 11) * 2^-53 in [0, 1).
/// Normals use Box-Muller on two consecutive draws, cosine branch only:
///   n = sqrt(-2 ln(1 - u1)) * cos(2 pi u2).
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
      : key_(splitmix64(seed ^ splitmix64(stream_id))) {}

  constexpr std::uint64_t at(std::uint64_t counter) const noexcept {
    return splitmix64(key_ + counter * kGolden);
  }

  constexpr std::uint64_t next_u64() noexcept { return at(counter_++); }

  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  double normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  constexpr std::uint64_t counter() const noexcept { return counter_; }
  constexpr std::uint64_t key() const noexcept { return key_; }

  friend constexpr bool operator==(const CounterRng&, const CounterRng&) = default;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace apd
