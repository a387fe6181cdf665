#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace sparseinr {

/// Counter-based generator: output n is a bijective mix of (key, n).
///
/// The state is just (key, counter), so streams are cheap to split and a
/// generator can be copied to replay a sequence. Satisfies
/// UniformRandomBitGenerator, but all library code uses the member
/// distributions below so results do not depend on the standard library.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(mix(mix(seed) ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return next_u64(); }

  std::uint64_t next_u64() noexcept { return mix(key_ + (counter_++) * 0x9E3779B97F4A7C15ULL); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), n >= 1. Lemire's multiply-shift with rejection.
  std::uint64_t uniform_index(std::uint64_t n) noexcept {
    __uint128_t m = static_cast<__uint128_t>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<__uint128_t>(next_u64()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Standard normal via Box-Muller (one variate per call; the pair is not cached
  /// so that the stream position is a pure function of the call count).
  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Independent generator derived from this one's key; does not advance *this.
  [[nodiscard]] Rng split(std::uint64_t stream) const noexcept { return Rng(key_, stream + 1); }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sparseinr
