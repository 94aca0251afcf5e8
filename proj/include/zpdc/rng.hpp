#pragma once

#include <cstdint>
#include <utility>

namespace zpdc {

/// splitmix64 stream generator (Steele, Lea & Flood). Tiny state, full 64-bit
/// period, and cheap enough to reseed per realization, which is what the
/// counter-based sub-seeding below relies on.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53 mantissa bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1]; safe as a log() argument.
  double next_unit_positive() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

private:
  std::uint64_t state_;
};

/// Deterministic per-realization sub-seed. One splitmix64 scramble of the
/// realization index, xored into the master seed, so realizations can be
/// generated independently and in any order with identical results.
inline std::uint64_t realization_seed(std::uint64_t master, std::uint64_t index) {
  SplitMix64 mix(index + 0x243F6A8885A308D3ull);
  return master ^ mix.next();
}

/// Box-Muller pair of independent standard normals.
/// u1 in (0,1], u2 in [0,1): z0 = sqrt(-2 ln u1) cos(2 pi u2),
/// z1 = sqrt(-2 ln u1) sin(2 pi u2). This exact transform is part of the
/// reproducibility contract; do not swap in another method silently.
std::pair<double, double> standard_normal_pair(SplitMix64& gen);

}  // namespace zpdc
