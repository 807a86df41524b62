#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "jumpmlmc/model.hpp"

namespace jumpmlmc {

inline constexpr int kMaxLevel = 30;

// Brownian increments and raw Poisson counts on the dyadic grid of a level.
// Counts are stored uncompensated; schemes subtract intensity * h on use.
struct NoiseGrid {
  int level = 0;
  std::size_t n_steps = 1;
  std::size_t brownian_dim = 1;
  double t0 = 0.0;
  double h = 1.0;
  std::vector<double> dW;         // n_steps x brownian_dim, row-major
  std::vector<std::uint32_t> dP;  // n_steps

  std::span<const double> dw(std::size_t step) const {
    return {dW.data() + step * brownian_dim, brownian_dim};
  }
  std::uint64_t total_jumps() const;
};

struct StreamId {
  int level = 0;
  std::uint64_t path_index = 0;
};

// Step size of a level: horizon / 2^level.
double level_step(double horizon, int level);

// Deterministic in (seed, stream.level, stream.path_index). The grid is built
// at `level`; stream.level only selects the random stream.
NoiseGrid generate(std::uint64_t seed, StreamId stream, const Problem& p, int level);
inline NoiseGrid generate(std::uint64_t seed, StreamId stream, const Problem& p) {
  return generate(seed, stream, p, stream.level);
}

// Pairwise sums of consecutive steps; throws std::invalid_argument at level 0.
NoiseGrid coarsen(const NoiseGrid& fine);

}  // namespace jumpmlmc
