#include "jumpmlmc/noise.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "jumpmlmc/random.hpp"

namespace jumpmlmc {

std::uint64_t NoiseGrid::total_jumps() const {
  return std::accumulate(dP.begin(), dP.end(), std::uint64_t{0});
}

double level_step(double horizon, int level) {
  if (level < 0 || level > kMaxLevel)
    throw std::out_of_range("level " + std::to_string(level) + " outside [0, " +
                            std::to_string(kMaxLevel) + "]");
  return std::ldexp(horizon, -level);
}

NoiseGrid generate(std::uint64_t seed, StreamId stream, const Problem& p, int level) {
  NoiseGrid g;
  g.level = level;
  g.h = level_step(p.horizon(), level);
  g.n_steps = std::size_t{1} << level;
  g.brownian_dim = p.brownian_dim;
  g.t0 = p.t0;
  g.dW.resize(g.n_steps * g.brownian_dim);
  g.dP.resize(g.n_steps);

  Xoshiro256 rng = make_stream(seed, static_cast<std::uint64_t>(stream.level), stream.path_index);
  NormalSampler normal;
  const double sd = std::sqrt(g.h);
  const double jump_mean = p.intensity * g.h;
  for (std::size_t n = 0; n < g.n_steps; ++n) {
    for (std::size_t j = 0; j < g.brownian_dim; ++j) g.dW[n * g.brownian_dim + j] = sd * normal(rng);
    g.dP[n] = sample_poisson(rng, jump_mean);
  }
  return g;
}

NoiseGrid coarsen(const NoiseGrid& fine) {
  if (fine.level < 1) throw std::invalid_argument("coarsen: cannot coarsen a level-0 grid");
  NoiseGrid c;
  c.level = fine.level - 1;
  c.n_steps = fine.n_steps / 2;
  c.brownian_dim = fine.brownian_dim;
  c.t0 = fine.t0;
  c.h = 2.0 * fine.h;
  c.dW.resize(c.n_steps * c.brownian_dim);
  c.dP.resize(c.n_steps);
  const std::size_t m = fine.brownian_dim;
  for (std::size_t k = 0; k < c.n_steps; ++k) {
    for (std::size_t j = 0; j < m; ++j)
      c.dW[k * m + j] = fine.dW[2 * k * m + j] + fine.dW[(2 * k + 1) * m + j];
    c.dP[k] = fine.dP[2 * k] + fine.dP[2 * k + 1];
  }
  return c;
}

}  // namespace jumpmlmc
