#pragma once

#include <cstdint>

namespace pimrl {

// SplitMix64 with Box-Muller on top. Bit-exact for a given seed on one
// platform, which is what every determinism contract in this project
// hangs off of. Keep the draw order of callers fixed.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Derives an independent stream; advances this generator by one draw.
  SplitMix64 split() { return SplitMix64(next() ^ 0x5851F42D4C957F2Dull); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  // Standard normal via Box-Muller; caches the spare deviate.
  double normal();

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pimrl
