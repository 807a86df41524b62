#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "jumpmlmc/analysis.hpp"
#include "jumpmlmc/coupling.hpp"
#include "jumpmlmc/errors.hpp"
#include "jumpmlmc/mlmc.hpp"

using namespace jumpmlmc;

namespace {

const PresetOverrides kTrivial{{"a", 0.0}, {"b", 0.0}, {"k", 0.0}};

// Real-valued allocation written out independently of the library.
std::vector<double> allocation_oracle(const std::vector<double>& v, const std::vector<double>& h,
                                      double eps) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += std::sqrt(v[i] / h[i]);
  std::vector<double> m(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) m[i] = 2.0 / (eps * eps) * std::sqrt(v[i] * h[i]) * s;
  return m;
}

double estimator_variance(const std::vector<double>& v, const std::vector<std::uint64_t>& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] / static_cast<double>(m[i]);
  return s;
}

}  // namespace

TEST_CASE("optimal allocation examples") {
  CHECK(optimal_allocation(std::vector{1.0}, std::vector{1.0}, 1.0) == std::vector<std::uint64_t>{2});
  const std::vector v{4.0, 1.0}, h{1.0, 0.5};
  const auto m = optimal_allocation(v, h, 0.1);
  CHECK(m == std::vector<std::uint64_t>{1366, 483});
  const auto ref = allocation_oracle(v, h, 0.1);
  CHECK(ref[0] == doctest::Approx(1365.685).epsilon(1e-6));
  CHECK(ref[1] == doctest::Approx(482.843).epsilon(1e-6));
}

TEST_CASE("allocation scales with the inverse square of eps") {
  const std::vector v{3.0, 0.7, 0.1}, h{1.0, 0.5, 0.25};
  const auto a = allocation_oracle(v, h, 0.2);
  const auto b = allocation_oracle(v, h, 0.1);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(b[i] == doctest::Approx(4.0 * a[i]));
  const auto ma = optimal_allocation(v, h, 0.02), mb = optimal_allocation(v, h, 0.01);
  for (std::size_t i = 0; i < v.size(); ++i)
    CHECK(std::abs(static_cast<double>(mb[i]) - 4.0 * static_cast<double>(ma[i])) <= 4.0);
}

TEST_CASE("allocation meets the variance budget and matches the oracle") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 8;
    std::vector<double> v(n), h(n);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = std::pow(10.0, -4.0 + 5.0 * u(rng));
      h[i] = std::ldexp(1.0, -static_cast<int>(i));
    }
    const double eps = std::pow(10.0, -2.5 + 2.0 * u(rng));
    const auto m = optimal_allocation(v, h, eps);
    CHECK(estimator_variance(v, m) <= eps * eps / 2.0);
    const auto ref = allocation_oracle(v, h, eps);
    for (std::size_t i = 0; i < n; ++i) CHECK(m[i] == std::max<std::uint64_t>(2, std::ceil(ref[i])));
  }
}

TEST_CASE("allocation is a constrained cost minimum") {
  // Move level i by one sample, rescale level j to hold the estimator variance
  // fixed, and check the cost does not drop by more than the ceil slack.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 5;
    std::vector<double> v(n), h(n);
    for (std::size_t i = 0; i < n; ++i) {
      h[i] = std::ldexp(1.0, -static_cast<int>(i));
      v[i] = u(rng) * h[i];
    }
    const auto mi = optimal_allocation(v, h, 0.01);
    const std::vector<double> m(mi.begin(), mi.end());
    double var = 0.0, cost = 0.0, slack = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      var += v[k] / m[k];
      cost += m[k] / h[k];
      slack += 1.0 / h[k];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (i + 1) % n;
      for (double d : {-1.0, 1.0}) {
        std::vector<double> q = m;
        q[i] += d;
        double others = 0.0;
        for (std::size_t k = 0; k < n; ++k)
          if (k != j) others += v[k] / q[k];
        q[j] = v[j] / (var - others);
        double c = 0.0;
        for (std::size_t k = 0; k < n; ++k) c += q[k] / h[k];
        CHECK(c >= cost - slack);
      }
    }
  }
}

TEST_CASE("allocation rejects malformed input") {
  CHECK_THROWS_AS((void)optimal_allocation(std::vector<double>{}, std::vector<double>{}, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)optimal_allocation(std::vector{1.0}, std::vector{1.0, 0.5}, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)optimal_allocation(std::vector{-1.0}, std::vector{1.0}, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)optimal_allocation(std::vector{1.0}, std::vector{0.0}, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)optimal_allocation(std::vector{1.0}, std::vector{1.0}, 0.0),
                  std::invalid_argument);
}

TEST_CASE("theoretical schedule") {
  const Schedule s = theoretical_schedule(1.0 / 3.0, 1.0);
  CHECK(s.L == 7);
  REQUIRE(s.samples.size() == 8);
  CHECK(s.samples[0] == 81);
  CHECK(s.samples[1] == 3528);
  for (int l = 1; l <= s.L; ++l)
    CHECK(s.samples[l] == static_cast<std::uint64_t>(std::ceil(16.0 * 49.0 * 9.0 / std::ldexp(1.0, l) - 1e-9)));

  const Schedule t = theoretical_schedule(0.1, 1.0);
  CHECK(t.L == 10);
  CHECK(t.samples[0] == 900);

  // 9 * 2 / 0.3^2 = 200 versus 100: one more level
  CHECK(theoretical_schedule(0.3, 2.0).L == theoretical_schedule(0.3, 1.0).L + 1);

  CHECK_THROWS_AS((void)theoretical_schedule(std::exp(-1.0), 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)theoretical_schedule(0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)theoretical_schedule(0.1, 0.0), std::invalid_argument);
}

TEST_CASE("level statistics") {
  LevelStats s;
  CHECK(std::isnan(s.var_diff()));
  s.n_samples = 4;
  s.sum_diff = 10.0;
  s.sumsq_diff = 30.0;  // samples 1,2,3,4
  CHECK(s.mean_diff() == 2.5);
  CHECK(s.var_diff() == doctest::Approx(5.0 / 3.0));
  CHECK(sample_cost(0, false) == 1);
  CHECK(sample_cost(3, true) == 12);
  CHECK(sample_cost(3, false) == 8);
}

TEST_CASE("adaptive run on a constant path") {
  const Problem p = preset(kLinearJumpOracle, kTrivial);
  AdaptiveConfig cfg;
  cfg.initial_samples = 100;
  cfg.run.seed = 3;
  const MlmcResult r = run_adaptive(p, SchemeKind::SSBE, payoff_from_id("terminal_id"), 0.01, cfg);
  CHECK(r.estimate == 1.0);
  CHECK(r.converged);
  CHECK(r.L_final == 2);
  for (const auto& l : r.levels) CHECK(l.var_diff() == 0.0);
  CHECK(r.variance_of_estimator == 0.0);
}

TEST_CASE("adaptive estimate of the linear oracle mean") {
  const Problem p = preset(kLinearJumpOracle);
  const double truth = linear_oracle_mean();
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    AdaptiveConfig cfg;
    cfg.run.seed = seed;
    const MlmcResult r = run_adaptive(p, SchemeKind::SSBE, payoff_from_id("terminal_id"), 0.02, cfg);
    if (std::abs(r.estimate - truth) <= 0.06) ++hits;
    double sum = 0.0, var = 0.0;
    for (const auto& l : r.levels) {
      sum += l.mean_diff();
      var += l.var_diff() / static_cast<double>(l.n_samples);
    }
    CHECK(r.estimate == doctest::Approx(sum).epsilon(1e-12));
    CHECK(r.variance_of_estimator == doctest::Approx(var).epsilon(1e-12));
    CHECK(r.variance_of_estimator <= 0.02 * 0.02 / 2.0);
  }
  CHECK(hits == 5);
}

TEST_CASE("adaptive run on the Ginzburg-Landau preset") {
  const Problem p = preset(kGinzburgLandauJump);
  AdaptiveConfig cfg;
  cfg.run.seed = 1;
  const MlmcResult r = run_adaptive(p, SchemeKind::SSBE, payoff_from_id("mean_sq"), 0.05, cfg);
  CHECK(r.base_level == 2);
  CHECK(r.L_final <= 10);
  CHECK(r.variance_of_estimator <= 0.05 * 0.05 / 2.0);
  CHECK(r.total_failures() == 0);
}

TEST_CASE("fixed schedules") {
  SUBCASE("constant path") {
    const Problem p = preset(kLinearJumpOracle, kTrivial);
    const MlmcResult r = run_fixed_schedule(p, SchemeKind::BE, payoff_from_id("terminal_id"),
                                            Schedule{1, {2, 2}}, {.seed = 1});
    CHECK(r.estimate == 1.0);
    CHECK(r.total_cost_steps == 2 + 2 * 3);
  }
  SUBCASE("oracle with the eps = 0.1 schedule") {
    const Problem p = preset(kLinearJumpOracle);
    const Schedule s = theoretical_schedule(0.1, 1.0);
    const MlmcResult r = run_fixed_schedule(p, SchemeKind::SSBE, payoff_from_id("terminal_id"), s,
                                            {.seed = 2}, 0.1);
    CHECK(std::abs(r.estimate - linear_oracle_mean()) <= 0.3);
    std::uint64_t cost = s.samples[0];
    for (int l = 1; l <= s.L; ++l) cost += s.samples[l] * ((std::uint64_t{1} << l) + (std::uint64_t{1} << (l - 1)));
    CHECK(r.total_cost_steps == cost);
    CHECK(r.L_final == s.L);
  }
}

TEST_CASE("results do not depend on the thread count") {
  const Problem p = preset(kGinzburgLandauJump);
  AdaptiveConfig cfg;
  cfg.initial_samples = 2000;
  cfg.run.seed = 4;
  cfg.run.threads = 1;
  const MlmcResult a = run_adaptive(p, SchemeKind::SSBE, payoff_from_id("sup_sq"), 0.1, cfg);
  cfg.run.threads = 4;
  const MlmcResult b = run_adaptive(p, SchemeKind::SSBE, payoff_from_id("sup_sq"), 0.1, cfg);
  CHECK(a.estimate == b.estimate);
  CHECK(a.variance_of_estimator == b.variance_of_estimator);
  REQUIRE(a.levels.size() == b.levels.size());
  for (std::size_t i = 0; i < a.levels.size(); ++i) {
    CHECK(a.levels[i].n_samples == b.levels[i].n_samples);
    CHECK(a.levels[i].sum_diff == b.levels[i].sum_diff);
    CHECK(a.levels[i].sumsq_diff == b.levels[i].sumsq_diff);
  }
}

TEST_CASE("correction means are unbiased") {
  // Library level sampler against a direct fine-minus-coarse loop over other streams.
  const Problem p = preset(kLinearJumpOracle);
  const Payoff f = payoff_from_id("terminal_sq");
  const int level = 3;
  const std::uint64_t n = 50000;
  const LevelStats s = sample_level(p, SchemeKind::SSBE, f, level, true, 0, n, {.seed = 8});
  double sum = 0, sq = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const CoupledPaths cp = simulate_coupled(p, SchemeKind::SSBE, level, 9, i);
    const double d = evaluate(f, cp.fine) - evaluate(f, cp.coarse);
    sum += d;
    sq += d * d;
  }
  const double m = sum / n, v = sq / n - m * m;
  const double se = std::sqrt((v + s.var_diff()) / n);
  CHECK(std::abs(s.mean_diff() - m) <= 4.0 * se);
}

TEST_CASE("correction variance decays with the level") {
  // Level 2 needs a coarse step h = 1/2, which violates h * c < 1 for this
  // drift, so the window starts at level 3.
  const Problem p = preset(kGinzburgLandauJump);
  const Payoff f = payoff_from_id("mean_sq");
  std::vector<double> levels, log_var;
  for (int l = 3; l <= 8; ++l) {
    const LevelStats s = sample_level(p, SchemeKind::SSBE, f, l, true, 0, 10000, {.seed = 1});
    levels.push_back(l);
    log_var.push_back(std::log2(s.var_diff()));
  }
  CHECK(ols_slope(levels, log_var) <= -0.7);
}

TEST_CASE("failure handling") {
  const Problem gl = preset(kGinzburgLandauJump);
  const Payoff f = payoff_from_id("mean_sq");
  SUBCASE("explicit failures are counted") {
    const LevelStats s = sample_level(gl, SchemeKind::Euler, f, 2, true, 0, 10000, {.seed = 1});
    CHECK(s.n_failures >= 1);
    CHECK(s.n_attempted() == 10000);
    CHECK(s.n_samples < 10000);
    CHECK(std::isfinite(s.mean_diff()));
  }
  SUBCASE("implicit failures propagate") {
    AdaptiveConfig cfg;
    cfg.base_level = 0;
    cfg.initial_samples = 100;
    CHECK_THROWS_AS((void)run_adaptive(gl, SchemeKind::SSBE, f, 0.1, cfg), NonContractive);
  }
  SUBCASE("base level selection") {
    CHECK(auto_base_level(gl, SchemeKind::SSBE) == 2);
    CHECK(auto_base_level(gl, SchemeKind::Euler) == 0);
    CHECK(auto_base_level(preset(kCubicAdditiveJump), SchemeKind::BE) == 1);
    CHECK(auto_base_level(preset(kLinearJumpOracle), SchemeKind::BE) == 0);
  }
}
