#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "jumpmlmc/mlmc.hpp"

namespace jumpmlmc {

// Ordinary least squares slope of y against x.
double ols_slope(std::span<const double> x, std::span<const double> y);

struct LevelOrderStats {
  int level = 0;
  std::uint64_t samples = 0;
  std::uint64_t failures = 0;
  double mean_diff = 0.0;
  double var_diff = 0.0;
  double log2_abs_mean = 0.0;
  double log2_var = 0.0;
  std::uint64_t cost_steps = 0;
  std::string error;  // non-empty when the level could not be simulated
};

struct OrderFit {
  double alpha_hat = 0.0;  // -slope of log2 |E[dP]|
  double beta_hat = 0.0;   // -slope of log2 Var[dP]
  int fit_lmin = 3;
  int fit_lmax = 8;
  std::size_t points = 0;
};

// Fits over the levels inside [fit_lmin, fit_lmax].
OrderFit fit_orders(std::span<const int> levels, std::span<const double> abs_means,
                    std::span<const double> variances, int fit_lmin = 3, int fit_lmax = 8);

struct ConvergenceReport {
  SchemeKind scheme = SchemeKind::SSBE;
  std::string payoff;
  std::vector<LevelOrderStats> levels;
  OrderFit fit;
};

struct OrdersConfig {
  int level_min = 1;
  int level_max = 8;
  std::uint64_t samples_per_level = 10000;
  int fit_lmin = 3;
  int fit_lmax = 8;
  RunOptions run;
};

ConvergenceReport estimate_orders(const Problem& p, SchemeKind kind, const Payoff& f,
                                  const OrdersConfig& cfg);

struct ComplexityRecord {
  double eps = 0.0;
  std::uint64_t total_cost_steps = 0;
  double wall_time_s = 0.0;
  int L_final = 0;
  double estimate = 0.0;
  bool converged = false;
  std::uint64_t failures = 0;
  std::string error;
};

struct ComplexitySweep {
  std::vector<ComplexityRecord> records;
  // Slope of log(cost) against log(1/eps) over successful runs; NaN when
  // fewer than two succeeded.
  double cost_slope = 0.0;
};

// One adaptive run per eps (descending). Per-run errors are recorded and the
// sweep continues.
ComplexitySweep complexity_sweep(const Problem& p, SchemeKind kind, const Payoff& f,
                                 std::span<const double> eps_list, const AdaptiveConfig& cfg);

}  // namespace jumpmlmc
