#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace slicenego {

/// SplitMix64: a tiny counter-style generator. Cheap to seed, which lets every
/// Monte Carlo sample own an independent substream derived from (seed, index),
/// so results do not depend on evaluation order or worker count.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Uniform double in [0, 1) from the top 53 bits; bit-identical on every
/// platform, unlike std::uniform_real_distribution.
inline double uniform01(SplitMix64& gen) noexcept {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform(SplitMix64& gen, double lo, double hi) noexcept {
  return lo + (hi - lo) * uniform01(gen);
}

/// Child seed for a numbered substream.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag) noexcept {
  SplitMix64 a(parent ^ 0x243f6a8885a308d3ULL);
  const std::uint64_t mixed = a() ^ (tag * 0xd1b54a32d192ed03ULL);
  SplitMix64 b(mixed);
  return b();
}

/// Child seed for a named substream (FNV-1a over the label).
inline std::uint64_t derive_seed(std::uint64_t parent, std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return derive_seed(parent, h);
}

}  // namespace slicenego
