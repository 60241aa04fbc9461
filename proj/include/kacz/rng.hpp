#pragma once

#include <array>
#include <cstdint>

namespace kacz {

/// splitmix64 output step (Steele, Lea, Flood 2014).
std::uint64_t splitmix64(std::uint64_t& state);

/// Derives an independent seed for stream `index` of `master_seed`:
/// one splitmix64 step from master_seed + (index + 1) * 0x9E3779B97F4A7C15.
std::uint64_t split_seed(std::uint64_t master_seed, std::uint64_t index);

/// xoshiro256** 1.0 with its 256-bit state filled by four splitmix64 draws
/// from the seed. Pinned so that draw sequences are reproducible anywhere.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  std::uint64_t operator()() { return next(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  /// (next() >> 11) * 2^-53, in [0, 1).
  double uniform();

  /// Uniform integer in [0, bound) by rejection on the top bits; bound > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller (cosine branch), two uniforms per draw.
  double normal();

 private:
  std::array<std::uint64_t, 4> s_;
};

}  // namespace kacz
