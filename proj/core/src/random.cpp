#include "jumpmlmc/random.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace jumpmlmc {

Xoshiro256::Xoshiro256(std::uint64_t seed) noexcept {
  std::uint64_t sm = seed;
  for (auto& word : s_) word = splitmix64(sm);
}

Xoshiro256::result_type Xoshiro256::operator()() noexcept {
  const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

Xoshiro256 make_stream(std::uint64_t seed, std::uint64_t level, std::uint64_t path_index) noexcept {
  // Absorb each counter through the mixer so that nearby tuples land on
  // unrelated engine states.
  std::uint64_t h = seed;
  std::uint64_t key = splitmix64(h);
  h = key ^ (level * 0xD1B54A32D192ED03ULL);
  key = splitmix64(h);
  h = key ^ (path_index * 0x8CB92BA72F3D8DD7ULL);
  key = splitmix64(h);
  return Xoshiro256(key);
}

double NormalSampler::operator()(Xoshiro256& rng) noexcept {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // u1 in (0, 1] keeps the logarithm finite.
  const double u1 = 1.0 - rng.uniform();
  const double u2 = rng.uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

std::uint32_t sample_poisson(Xoshiro256& rng, double mean) noexcept {
  if (!(mean > 0.0)) return 0;
  const double u = rng.uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::uint32_t k = 0;
  // The cap only matters when the tail mass underflows.
  while (u > cdf && k < 10000) {
    ++k;
    p *= mean / k;
    cdf += p;
    if (p == 0.0) break;
  }
  return k;
}

}  // namespace jumpmlmc
