#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jumpmlmc/model.hpp"
#include "jumpmlmc/payoff.hpp"
#include "jumpmlmc/schemes.hpp"

namespace jumpmlmc {

// Accumulators for one level. At the base level the "difference" is the
// payoff itself; above it, P_l - P_{l-1} on a coupled pair.
struct LevelStats {
  int level = 0;
  bool coupled = false;
  std::uint64_t n_samples = 0;
  std::uint64_t n_failures = 0;
  double sum_diff = 0.0;
  double sumsq_diff = 0.0;
  double sum_fine = 0.0;
  double sumsq_fine = 0.0;
  std::uint64_t cost_steps = 0;

  std::uint64_t n_attempted() const noexcept { return n_samples + n_failures; }
  double mean_diff() const noexcept;
  // Bessel-corrected; NaN below two samples.
  double var_diff() const noexcept;
  double mean_fine() const noexcept;
  double var_fine() const noexcept;
};

// Time steps of one sample at `level`: 2^l + 2^(l-1) coupled, 2^l at the base.
std::uint64_t sample_cost(int level, bool coupled) noexcept;

struct MlmcResult {
  double estimate = 0.0;
  std::vector<LevelStats> levels;
  int base_level = 0;
  int L_final = 0;
  double epsilon_target = 0.0;
  std::uint64_t total_cost_steps = 0;
  double bias_estimate = 0.0;
  double variance_of_estimator = 0.0;
  double wall_time_s = 0.0;
  bool converged = true;
  std::uint64_t seed = 0;

  std::uint64_t total_failures() const noexcept;
};

// Sample counts minimizing sum M_l / h_l subject to sum V_l / M_l <= eps^2 / 2:
// M_l = ceil(2 eps^-2 sqrt(V_l h_l) sum_i sqrt(V_i / h_i)), at least 2.
std::vector<std::uint64_t> optimal_allocation(std::span<const double> variances,
                                              std::span<const double> steps, double eps);

// Explicit schedule with strong error O(eps):
// L = ceil(log2(9 horizon / eps^2)), M_0 = ceil(9 / eps^2),
// M_l = ceil(16 L^2 horizon / (eps^2 2^l)) for l = 1..L. Requires eps < 1/e.
struct Schedule {
  int L = 0;
  std::vector<std::uint64_t> samples;  // index l = 0..L
};
Schedule theoretical_schedule(double eps, double horizon);

struct RunOptions {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  SchemeConfig scheme;
};

struct AdaptiveConfig {
  int L_start = 2;
  int L_max = 10;
  std::uint64_t initial_samples = 10000;
  double alpha_assumed = 1.0;
  // Coarsest simulated level; negative selects the smallest level whose step
  // passes the h * c < 1 guard (always 0 for explicit schemes).
  int base_level = -1;
  RunOptions run;
};

int auto_base_level(const Problem& p, SchemeKind kind, int max_level = kMaxLevel);

// Draws samples [first, first + count) of a level and returns their
// accumulated statistics, reduced in path-index order. Explicit-scheme
// failures are counted; implicit-scheme failures propagate.
LevelStats sample_level(const Problem& p, SchemeKind kind, const Payoff& f, int level,
                        bool coupled, std::uint64_t first, std::uint64_t count,
                        const RunOptions& opts);
void merge_into(LevelStats& into, const LevelStats& more);

// Adaptive driver. Returns with converged == false when the bias test still
// fails at L_max.
MlmcResult run_adaptive(const Problem& p, SchemeKind kind, const Payoff& f, double eps,
                        const AdaptiveConfig& cfg = {});

// Runs exactly the given levels 0..L and sample counts.
MlmcResult run_fixed_schedule(const Problem& p, SchemeKind kind, const Payoff& f,
                              const Schedule& schedule, const RunOptions& opts = {},
                              double eps = 0.0);

}  // namespace jumpmlmc
