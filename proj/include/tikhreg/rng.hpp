#pragma once

// Seeded random streams. The generator is xoshiro256** (Blackman & Vigna)
// with its state expanded from a 64-bit seed by SplitMix64; Gaussian variates
// come from the Box-Muller transform, consuming two uniforms per pair and
// emitting the cosine branch first. The whole chain is specified here so that
// any other implementation fed the same seed reproduces the same noise bits.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace tikhreg {

constexpr std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  std::uint64_t s = x;
  return splitmix64_next(s);
}

class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Xoshiro256(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64_next(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> s_{};
};

/// Standard normal variates via Box-Muller on a Xoshiro256 stream.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) noexcept : gen_(seed) {}

  double operator()() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // 1 - u lies in (0, 1], keeping the logarithm finite.
    const double u1 = 1.0 - gen_.uniform();
    const double u2 = gen_.uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  Xoshiro256 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Seed of the noise stream for one Monte Carlo realization. delta enters as
/// round(delta * 1e6), so cells are reproducible regardless of visiting order.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t n, double delta,
                                 std::uint64_t rep) noexcept {
  const auto delta_key = static_cast<std::uint64_t>(std::llround(delta * 1e6));
  std::uint64_t h = mix64(master);
  h = mix64(h ^ n);
  h = mix64(h ^ delta_key);
  h = mix64(h ^ rep);
  return h;
}

}  // namespace tikhreg
