#pragma once

#include <cstdint>
#include <limits>

namespace cbp {

/// SplitMix64 finaliser; a bijective 64-bit mixing function.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream key from a parent key and up to two indices.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept {
  return mix64(mix64(mix64(seed) ^ (a * 0xD1B54A32D192ED03ULL)) ^ (b * 0xAEF17502108EF2D9ULL + 1));
}

/// Counter-based generator: the i-th output of the stream with key k is
/// mix64(k + i * golden), so any draw is addressable by (key, index) and a
/// stream is reproducible regardless of how work is scheduled. Satisfies
/// UniformRandomBitGenerator so it can drive <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : key_(mix64(key)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return mix64(key_ + 0x9E3779B97F4A7C15ULL * counter_++); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Substream for generation `generation` of the trajectory with `seed`.
inline CounterRng generation_stream(std::uint64_t seed, std::uint64_t generation) noexcept {
  return CounterRng(derive_key(seed, generation));
}

}  // namespace cbp
