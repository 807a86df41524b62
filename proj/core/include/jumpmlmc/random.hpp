#pragma once

#include <cstdint>

namespace jumpmlmc {

// SplitMix64 finalizer. Used to hash (seed, level, path_index) into an
// independent engine state.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// xoshiro256** engine. Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept;

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t s_[4];
};

// Counter-based stream derivation: the engine for a given (seed, level,
// path_index) depends on nothing else, so results do not depend on the order
// in which paths are simulated.
Xoshiro256 make_stream(std::uint64_t seed, std::uint64_t level, std::uint64_t path_index) noexcept;

// Standard normal sampling by the Box-Muller transform; the second variate of
// each pair is cached.
class NormalSampler {
 public:
  double operator()(Xoshiro256& rng) noexcept;

 private:
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Poisson(mean) by inversion with sequential search. Intended for mean <= 10.
std::uint32_t sample_poisson(Xoshiro256& rng, double mean) noexcept;

}  // namespace jumpmlmc
