#include "jumpmlmc/coupling.hpp"

#include <stdexcept>

#include "jumpmlmc/errors.hpp"

namespace jumpmlmc {

namespace {

Path simulate_tagged(const Problem& p, SchemeKind kind, const NoiseGrid& g,
                     const SchemeConfig& cfg, const char* role) {
  try {
    return simulate_path(p, kind, g, cfg);
  } catch (SimulationError& e) {
    e.annotate_role(role);
    throw;
  }
}

}  // namespace

CoupledPaths simulate_coupled(const Problem& p, SchemeKind kind, int level, std::uint64_t seed,
                              std::uint64_t path_index, const SchemeConfig& cfg) {
  if (level < 1) throw std::invalid_argument("simulate_coupled: level must be >= 1");
  const NoiseGrid fine_noise = generate(seed, {level, path_index}, p, level);
  CoupledPaths out;
  out.level = level;
  out.fine = simulate_tagged(p, kind, fine_noise, cfg, "fine");
  out.coarse = simulate_tagged(p, kind, coarsen(fine_noise), cfg, "coarse");
  return out;
}

Path simulate_base(const Problem& p, SchemeKind kind, int level, std::uint64_t seed,
                   std::uint64_t path_index, const SchemeConfig& cfg) {
  return simulate_tagged(p, kind, generate(seed, {level, path_index}, p, level), cfg, "fine");
}

}  // namespace jumpmlmc
