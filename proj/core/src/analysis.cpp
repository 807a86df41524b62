#include "jumpmlmc/analysis.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "jumpmlmc/errors.hpp"

namespace jumpmlmc {

double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("ols_slope: need at least two paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("ols_slope: x values are all equal");
  return sxy / sxx;
}

OrderFit fit_orders(std::span<const int> levels, std::span<const double> abs_means,
                    std::span<const double> variances, int fit_lmin, int fit_lmax) {
  if (levels.size() != abs_means.size() || levels.size() != variances.size())
    throw std::invalid_argument("fit_orders: input arrays differ in length");
  OrderFit fit;
  fit.fit_lmin = fit_lmin;
  fit.fit_lmax = fit_lmax;
  std::vector<double> lm, ym, lv, yv;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < fit_lmin || levels[i] > fit_lmax) continue;
    if (abs_means[i] > 0.0 && std::isfinite(abs_means[i])) {
      lm.push_back(levels[i]);
      ym.push_back(std::log2(abs_means[i]));
    }
    if (variances[i] > 0.0 && std::isfinite(variances[i])) {
      lv.push_back(levels[i]);
      yv.push_back(std::log2(variances[i]));
    }
  }
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  fit.alpha_hat = lm.size() >= 2 ? -ols_slope(lm, ym) : nan;
  fit.beta_hat = lv.size() >= 2 ? -ols_slope(lv, yv) : nan;
  fit.points = lv.size();
  return fit;
}

ConvergenceReport estimate_orders(const Problem& p, SchemeKind kind, const Payoff& f,
                                  const OrdersConfig& cfg) {
  if (cfg.level_min < 1 || cfg.level_max > 12 || cfg.level_min > cfg.level_max)
    throw std::invalid_argument("estimate_orders: level range must lie within [1, 12]");
  if (cfg.samples_per_level < 100)
    throw std::invalid_argument("estimate_orders: need at least 100 samples per level");

  ConvergenceReport report;
  report.scheme = kind;
  report.payoff = f.id;
  std::vector<int> levels;
  std::vector<double> means, vars;
  for (int l = cfg.level_min; l <= cfg.level_max; ++l) {
    LevelOrderStats row;
    row.level = l;
    try {
      const LevelStats s = sample_level(p, kind, f, l, true, 0, cfg.samples_per_level, cfg.run);
      row.samples = s.n_samples;
      row.failures = s.n_failures;
      row.mean_diff = s.mean_diff();
      row.var_diff = s.var_diff();
      row.log2_abs_mean = std::log2(std::abs(row.mean_diff));
      row.log2_var = std::log2(row.var_diff);
      row.cost_steps = s.cost_steps;
      levels.push_back(l);
      means.push_back(std::abs(row.mean_diff));
      vars.push_back(row.var_diff);
    } catch (const SimulationError& e) {
      row.error = e.what();
      row.mean_diff = row.var_diff = row.log2_abs_mean = row.log2_var =
          std::numeric_limits<double>::quiet_NaN();
    }
    report.levels.push_back(row);
  }
  report.fit = fit_orders(levels, means, vars, cfg.fit_lmin, cfg.fit_lmax);
  return report;
}

ComplexitySweep complexity_sweep(const Problem& p, SchemeKind kind, const Payoff& f,
                                 std::span<const double> eps_list, const AdaptiveConfig& cfg) {
  if (eps_list.empty()) throw std::invalid_argument("complexity_sweep: empty eps list");
  for (std::size_t i = 1; i < eps_list.size(); ++i) {
    if (!(eps_list[i] < eps_list[i - 1]))
      throw std::invalid_argument("complexity_sweep: eps list must be strictly descending");
  }
  ComplexitySweep sweep;
  std::vector<double> x, y;
  for (double eps : eps_list) {
    ComplexityRecord rec;
    rec.eps = eps;
    try {
      const MlmcResult r = run_adaptive(p, kind, f, eps, cfg);
      rec.total_cost_steps = r.total_cost_steps;
      rec.wall_time_s = r.wall_time_s;
      rec.L_final = r.L_final;
      rec.estimate = r.estimate;
      rec.converged = r.converged;
      rec.failures = r.total_failures();
      x.push_back(std::log(1.0 / eps));
      y.push_back(std::log(static_cast<double>(r.total_cost_steps)));
    } catch (const SimulationError& e) {
      rec.error = e.what();
    }
    sweep.records.push_back(rec);
  }
  sweep.cost_slope = x.size() >= 2 ? ols_slope(x, y) : std::numeric_limits<double>::quiet_NaN();
  return sweep;
}

}  // namespace jumpmlmc
