#pragma once

#include <cstdint>

#include "jumpmlmc/model.hpp"
#include "jumpmlmc/noise.hpp"
#include "jumpmlmc/schemes.hpp"

namespace jumpmlmc {

// Fine and coarse paths of one correction sample, both driven by the same
// noise: the coarse grid is coarsen() of the fine one.
struct CoupledPaths {
  int level = 1;
  Path fine;
  Path coarse;

  std::vector<double> fine_times() const { return fine.times(); }
  std::vector<double> coarse_times() const { return coarse.times(); }
};

// Fine path at `level` from stream (level, path_index), coarse path on the
// coarsened grid. Errors are tagged "fine" or "coarse".
CoupledPaths simulate_coupled(const Problem& p, SchemeKind kind, int level, std::uint64_t seed,
                              std::uint64_t path_index, const SchemeConfig& cfg = {});

// Uncoupled path at a base level (level 0 by default), one stream per index.
Path simulate_base(const Problem& p, SchemeKind kind, int level, std::uint64_t seed,
                   std::uint64_t path_index, const SchemeConfig& cfg = {});

inline Path simulate_level0(const Problem& p, SchemeKind kind, std::uint64_t seed,
                            std::uint64_t path_index, const SchemeConfig& cfg = {}) {
  return simulate_base(p, kind, 0, seed, path_index, cfg);
}

}  // namespace jumpmlmc
