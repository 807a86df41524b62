#include "jumpmlmc/mlmc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "jumpmlmc/coupling.hpp"
#include "jumpmlmc/errors.hpp"
#include "jumpmlmc/parallel.hpp"

namespace jumpmlmc {

double LevelStats::mean_diff() const noexcept {
  return n_samples == 0 ? std::numeric_limits<double>::quiet_NaN()
                        : sum_diff / static_cast<double>(n_samples);
}

namespace {

double bessel_variance(double sum, double sumsq, std::uint64_t n) {
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = static_cast<double>(n);
  return std::max(0.0, (sumsq - sum * sum / m) / (m - 1.0));
}

// Ceiling that forgives representation error in values meant to be integers,
// e.g. 9 / (1/3)^2 evaluating to 81.00000000000001.
std::uint64_t snapped_ceil(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::uint64_t>(r);
  return static_cast<std::uint64_t>(std::ceil(x));
}

}  // namespace

double LevelStats::var_diff() const noexcept { return bessel_variance(sum_diff, sumsq_diff, n_samples); }

double LevelStats::mean_fine() const noexcept {
  return n_samples == 0 ? std::numeric_limits<double>::quiet_NaN()
                        : sum_fine / static_cast<double>(n_samples);
}

double LevelStats::var_fine() const noexcept { return bessel_variance(sum_fine, sumsq_fine, n_samples); }

std::uint64_t sample_cost(int level, bool coupled) noexcept {
  const std::uint64_t fine = std::uint64_t{1} << level;
  return coupled ? fine + fine / 2 : fine;
}

std::uint64_t MlmcResult::total_failures() const noexcept {
  std::uint64_t n = 0;
  for (const auto& s : levels) n += s.n_failures;
  return n;
}

std::vector<std::uint64_t> optimal_allocation(std::span<const double> variances,
                                              std::span<const double> steps, double eps) {
  if (variances.empty()) throw std::invalid_argument("optimal_allocation: no levels");
  if (variances.size() != steps.size())
    throw std::invalid_argument("optimal_allocation: variance and step arrays differ in length");
  if (!(eps > 0.0)) throw std::invalid_argument("optimal_allocation: eps must be > 0");
  double total = 0.0;
  for (std::size_t l = 0; l < variances.size(); ++l) {
    if (!(variances[l] >= 0.0) || !std::isfinite(variances[l]))
      throw std::invalid_argument("optimal_allocation: variances must be finite and >= 0");
    if (!(steps[l] > 0.0)) throw std::invalid_argument("optimal_allocation: steps must be > 0");
    total += std::sqrt(variances[l] / steps[l]);
  }
  std::vector<std::uint64_t> m(variances.size());
  for (std::size_t l = 0; l < m.size(); ++l) {
    const double target = 2.0 / (eps * eps) * std::sqrt(variances[l] * steps[l]) * total;
    m[l] = std::max<std::uint64_t>(2, static_cast<std::uint64_t>(std::ceil(target)));
  }
  return m;
}

Schedule theoretical_schedule(double eps, double horizon) {
  if (!(eps > 0.0) || !(eps < std::exp(-1.0)))
    throw std::invalid_argument("theoretical_schedule: requires 0 < eps < 1/e");
  if (!(horizon > 0.0)) throw std::invalid_argument("theoretical_schedule: horizon must be > 0");
  const double inv_eps2 = 1.0 / (eps * eps);

  // L = ceil(log2(9 horizon / eps^2)); snap the argument first so exact powers
  // of two are not pushed up by rounding.
  const double arg = 9.0 * horizon * inv_eps2;
  const double lg = std::log2(arg);
  const double lg_round = std::round(lg);
  int L = std::abs(lg - lg_round) <= 1e-12 * std::max(1.0, std::abs(lg))
              ? static_cast<int>(lg_round)
              : static_cast<int>(std::ceil(lg));
  L = std::max(L, 1);
  if (L > kMaxLevel) throw std::invalid_argument("theoretical_schedule: eps too small");

  Schedule s;
  s.L = L;
  s.samples.resize(static_cast<std::size_t>(L) + 1);
  s.samples[0] = snapped_ceil(9.0 * inv_eps2);
  const double l2 = static_cast<double>(L) * static_cast<double>(L);
  for (int l = 1; l <= L; ++l)
    s.samples[static_cast<std::size_t>(l)] = snapped_ceil(16.0 * l2 * inv_eps2 * std::ldexp(horizon, -l));
  return s;
}

int auto_base_level(const Problem& p, SchemeKind kind, int max_level) {
  if (!is_implicit(kind)) return 0;
  const double c = p.one_sided_lipschitz;
  for (int l = 0; l <= max_level; ++l) {
    if (level_step(p.horizon(), l) * c < 1.0) return l;
  }
  throw NonContractive(level_step(p.horizon(), max_level), c);
}

void merge_into(LevelStats& into, const LevelStats& more) {
  into.n_samples += more.n_samples;
  into.n_failures += more.n_failures;
  into.sum_diff += more.sum_diff;
  into.sumsq_diff += more.sumsq_diff;
  into.sum_fine += more.sum_fine;
  into.sumsq_fine += more.sumsq_fine;
  into.cost_steps += more.cost_steps;
}

namespace {

struct Outcome {
  double diff = 0.0;
  double fine = 0.0;
  std::uint64_t cost = 0;
  bool failed = false;
};

std::uint64_t partial_cost(const SimulationError& e, int level) {
  const std::uint64_t done = e.step_index().value_or(0) + 1;
  if (e.role() == "coarse") return (std::uint64_t{1} << level) + done;
  return done;
}

}  // namespace

LevelStats sample_level(const Problem& p, SchemeKind kind, const Payoff& f, int level,
                        bool coupled, std::uint64_t first, std::uint64_t count,
                        const RunOptions& opts) {
  if (coupled && level < 1) throw std::invalid_argument("sample_level: coupled level must be >= 1");
  std::vector<Outcome> outcomes(count);
  const bool implicit = is_implicit(kind);
  parallel_for(count, opts.threads, [&](std::size_t i) {
    const std::uint64_t index = first + i;
    Outcome& o = outcomes[i];
    try {
      if (coupled) {
        const CoupledPaths cp = simulate_coupled(p, kind, level, opts.seed, index, opts.scheme);
        o.fine = evaluate(f, cp.fine);
        o.diff = o.fine - evaluate(f, cp.coarse);
      } else {
        const Path path = simulate_base(p, kind, level, opts.seed, index, opts.scheme);
        o.fine = evaluate(f, path);
        o.diff = o.fine;
      }
      o.cost = sample_cost(level, coupled);
    } catch (SimulationError& e) {
      if (implicit) throw;
      o.failed = true;
      o.cost = partial_cost(e, level);
    }
  });

  // Fixed reduction order keeps results independent of the thread count.
  LevelStats s;
  s.level = level;
  s.coupled = coupled;
  for (const Outcome& o : outcomes) {
    s.cost_steps += o.cost;
    if (o.failed) {
      ++s.n_failures;
      continue;
    }
    ++s.n_samples;
    s.sum_diff += o.diff;
    s.sumsq_diff += o.diff * o.diff;
    s.sum_fine += o.fine;
    s.sumsq_fine += o.fine * o.fine;
  }
  return s;
}

namespace {

void finish(MlmcResult& r, double alpha, std::chrono::steady_clock::time_point start) {
  r.estimate = 0.0;
  r.variance_of_estimator = 0.0;
  r.total_cost_steps = 0;
  for (const auto& s : r.levels) {
    if (s.n_samples > 0) r.estimate += s.mean_diff();
    if (s.n_samples >= 2) r.variance_of_estimator += s.var_diff() / static_cast<double>(s.n_samples);
    r.total_cost_steps += s.cost_steps;
  }
  const LevelStats& top = r.levels.back();
  r.bias_estimate = top.n_samples > 0 ? std::abs(top.mean_diff()) / (std::exp2(alpha) - 1.0)
                                      : std::numeric_limits<double>::infinity();
  r.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Level variances with gaps filled from the nearest estimated level below,
// decayed by 2^-beta_hat per level.
std::vector<double> filled_variances(const std::vector<LevelStats>& levels) {
  std::vector<double> v(levels.size());
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    v[i] = levels[i].var_diff();
    if (levels[i].coupled && levels[i].n_samples >= 2 && v[i] > 0.0) {
      xs.push_back(levels[i].level);
      ys.push_back(std::log2(v[i]));
    }
  }
  double beta = 1.0;
  if (xs.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(ys.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    beta = std::max(0.5, -sxy / sxx);
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isnan(v[i])) continue;
    if (i == 0) {
      v[i] = 0.0;
      continue;
    }
    v[i] = v[i - 1] * std::exp2(-beta);
  }
  return v;
}

}  // namespace

MlmcResult run_adaptive(const Problem& p, SchemeKind kind, const Payoff& f, double eps,
                        const AdaptiveConfig& cfg) {
  if (!(eps > 0.0)) throw std::invalid_argument("run_adaptive: eps must be > 0");
  if (cfg.L_start < 0 || cfg.L_max < cfg.L_start || cfg.L_max > kMaxLevel)
    throw std::invalid_argument("run_adaptive: requires 0 <= L_start <= L_max <= 30");
  if (cfg.initial_samples < 2) throw std::invalid_argument("run_adaptive: initial_samples must be >= 2");
  if (!(cfg.alpha_assumed > 0.0)) throw std::invalid_argument("run_adaptive: alpha must be > 0");
  cfg.run.scheme.solver.validate();

  const auto start = std::chrono::steady_clock::now();
  const int base = cfg.base_level >= 0 ? cfg.base_level : auto_base_level(p, kind, cfg.L_max);
  if (base > cfg.L_max) throw std::invalid_argument("run_adaptive: base level exceeds L_max");

  MlmcResult r;
  r.base_level = base;
  r.epsilon_target = eps;
  r.seed = cfg.run.seed;

  // At least two correction levels above the base so the bias test and the
  // variance regression have something to work with.
  int L = std::min(cfg.L_max, std::max(cfg.L_start, base + 2));
  for (int l = base; l <= L; ++l) {
    LevelStats s;
    s.level = l;
    s.coupled = l > base;
    r.levels.push_back(s);
  }
  std::vector<std::uint64_t> extra(r.levels.size(), cfg.initial_samples);

  auto steps = [&] {
    std::vector<double> h(r.levels.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = level_step(p.horizon(), r.levels[i].level);
    return h;
  };
  auto plan = [&] {
    const std::vector<double> v = filled_variances(r.levels);
    const std::vector<double> h = steps();
    const std::vector<std::uint64_t> target = optimal_allocation(v, h, eps);
    extra.assign(r.levels.size(), 0);
    bool any = false;
    for (std::size_t i = 0; i < target.size(); ++i) {
      if (target[i] > r.levels[i].n_samples) {
        extra[i] = target[i] - r.levels[i].n_samples;
        any = true;
      }
    }
    return any;
  };

  const double bias_tol = eps / std::numbers::sqrt2;
  for (;;) {
    for (std::size_t i = 0; i < r.levels.size(); ++i) {
      if (extra[i] == 0) continue;
      LevelStats& s = r.levels[i];
      merge_into(s, sample_level(p, kind, f, s.level, s.coupled, s.n_attempted(), extra[i], cfg.run));
    }
    if (plan()) continue;

    const LevelStats& top = r.levels.back();
    const double bias = top.n_samples > 0
                            ? std::abs(top.mean_diff()) / (std::exp2(cfg.alpha_assumed) - 1.0)
                            : std::numeric_limits<double>::infinity();
    if (top.coupled && bias <= bias_tol) break;
    if (L >= cfg.L_max) {
      r.converged = false;
      break;
    }
    ++L;
    LevelStats s;
    s.level = L;
    s.coupled = L > base;
    r.levels.push_back(s);
    plan();
  }

  r.L_final = L;
  finish(r, cfg.alpha_assumed, start);
  return r;
}

MlmcResult run_fixed_schedule(const Problem& p, SchemeKind kind, const Payoff& f,
                              const Schedule& schedule, const RunOptions& opts, double eps) {
  if (schedule.L < 0 || schedule.samples.size() != static_cast<std::size_t>(schedule.L) + 1)
    throw std::invalid_argument("run_fixed_schedule: schedule needs L + 1 sample counts");
  opts.scheme.solver.validate();
  const auto start = std::chrono::steady_clock::now();
  MlmcResult r;
  r.base_level = 0;
  r.L_final = schedule.L;
  r.epsilon_target = eps;
  r.seed = opts.seed;
  for (int l = 0; l <= schedule.L; ++l) {
    LevelStats s = sample_level(p, kind, f, l, l > 0, 0, schedule.samples[static_cast<std::size_t>(l)], opts);
    s.level = l;
    s.coupled = l > 0;
    r.levels.push_back(s);
  }
  finish(r, 1.0, start);
  return r;
}

}  // namespace jumpmlmc
