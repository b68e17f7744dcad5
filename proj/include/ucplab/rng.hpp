#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ucplab {

/// Deterministic random stream used everywhere a seed appears in the public API.
///
/// Wraps a SplitMix64-seeded xoshiro256** core.  The generator and all
/// derived distributions are written out explicitly (no std::*_distribution)
/// so that a given seed produces the same stream on every build of this
/// project on the same platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    // SplitMix64 expansion of the seed into the xoshiro state.
    std::uint64_t x = seed;
    for (auto& word : s_) {
      x += 0x9e3779b97f4a7c15ull;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      word = z ^ (z >> 31);
    }
  }

  /// Derive an independent stream, e.g. one per sweep chunk.  Mixing the
  /// label through SplitMix64 keeps streams decorrelated for adjacent labels.
  static Rng stream(std::uint64_t seed, std::uint64_t label) {
    return Rng(seed ^ (0x517cc1b727220a95ull * (label + 1)));
  }

  std::uint64_t next_u64() {
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

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal via Box-Muller; one value per call, cache discarded
  /// deliberately so the stream position is call-count deterministic.
  double normal() {
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
  std::uint64_t s_[4];
};

}  // namespace ucplab
