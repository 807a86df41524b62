#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "jumpmlmc/errors.hpp"
#include "jumpmlmc/model.hpp"

using namespace jumpmlmc;

namespace {

double drift1(const Problem& p, double x) {
  double in[1] = {x}, out[1] = {0};
  p.drift(in, out);
  return out[0];
}

double jac1(const Problem& p, double x) {
  double in[1] = {x}, out[1] = {0};
  p.drift_jacobian(in, out);
  return out[0];
}

}  // namespace

TEST_CASE("presets carry the experiment coefficients") {
  const Problem gl = preset(kGinzburgLandauJump);
  CHECK(drift1(gl, 1.0) == 1.0);
  CHECK(drift1(gl, 2.0) == -4.0);
  CHECK(gl.intensity == 1.0);
  CHECK(gl.x0 == State{1.0});
  CHECK(gl.t0 == 0.0);
  CHECK(gl.T == 1.0);
  CHECK(gl.one_sided_lipschitz == 2.0);

  const Problem cubic = preset(kCubicAdditiveJump);
  CHECK(cubic.x0 == State{0.0});
  CHECK(drift1(cubic, 2.0) == -6.0);
  double in[1] = {5.0}, sigma[1] = {0};
  cubic.diffusion(in, sigma);
  CHECK(sigma[0] == 1.0);

  const Problem lin = preset(kLinearJumpOracle);
  CHECK(drift1(lin, 2.0) == doctest::Approx(0.1));
  CHECK(linear_oracle_mean() == doctest::Approx(std::exp(0.05)).epsilon(1e-15));
  CHECK(linear_oracle_mean() == doctest::Approx(1.051271).epsilon(1e-6));
}

TEST_CASE("unknown preset names the valid set") {
  try {
    (void)preset("heston");
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("ginzburg_landau_jump") != std::string::npos);
    CHECK(msg.find("cubic_additive_jump") != std::string::npos);
    CHECK(msg.find("linear_jump_oracle") != std::string::npos);
  }
}

TEST_CASE("overrides") {
  const Problem zero = preset(kLinearJumpOracle, {{"a", 0.0}, {"b", 0.0}, {"k", 0.0}});
  CHECK(drift1(zero, 3.0) == 0.0);
  const Problem no_jumps = preset(kGinzburgLandauJump, {{"lambda", 0.0}});
  CHECK(no_jumps.intensity == 0.0);
  CHECK_THROWS_AS((void)preset(kGinzburgLandauJump, {{"a", 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS((void)preset(kGinzburgLandauJump, {{"lambda", -1.0}}), std::invalid_argument);
  CHECK_THROWS_AS((void)preset(kGinzburgLandauJump, {{"T", 0.0}}), std::invalid_argument);
}

// Exact sampling of the linear SDE with compensated jumps:
// X_T = x0 exp((a - lambda k - b^2/2) T + b W_T) (1 + k)^{P_T}.
TEST_CASE("linear oracle mean agrees with exact-solution Monte Carlo") {
  const double a = 0.05, b = 0.2, k = 0.1, lambda = 1.0, T = 1.0;
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::poisson_distribution<int> poisson(lambda * T);
  const int n = 1'000'000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = std::exp((a - lambda * k - 0.5 * b * b) * T + b * std::sqrt(T) * normal(rng)) *
                     std::pow(1.0 + k, poisson(rng));
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sumsq / n - mean * mean) / n);
  CHECK(std::abs(mean - linear_oracle_mean()) < 4.0 * se);
}

TEST_CASE("drift Jacobians match finite differences") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (const auto& name : preset_names()) {
    const Problem p = preset(name);
    REQUIRE(p.has_jacobian());
    for (int i = 0; i < 200; ++i) {
      const double x = u(rng);
      const double v = u(rng);
      for (double eps : {1e-2, 1e-3}) {
        const double err = std::abs(drift1(p, x + eps * v) - drift1(p, x) - eps * jac1(p, x) * v);
        // Second-order remainder: |mu''| <= 6 * (|x| + |eps v|) for the cubic drifts.
        CHECK(err <= 6.0 * (std::abs(x) + 1.0) * eps * eps * v * v + 1e-12);
      }
    }
  }
}

TEST_CASE("preset coefficients stay finite up to 1e6") {
  for (const auto& name : preset_names()) {
    const Problem p = preset(name);
    for (double x : {-1e6, -1.0, 0.0, 0.5, 1e6}) {
      double in[1] = {x}, out[1];
      p.drift(in, out);
      CHECK(std::isfinite(out[0]));
      p.diffusion(in, out);
      CHECK(std::isfinite(out[0]));
      p.jump_coeff(in, out);
      CHECK(std::isfinite(out[0]));
    }
  }
}

TEST_CASE("one-sided Lipschitz probe") {
  SUBCASE("linear contraction") {
    const Problem p = make_scalar_problem("contract", {[](double x) { return -x; }, {},
                                                       [](double) { return 0.0; },
                                                       [](double) { return 0.0; }},
                                          0.0, 1.0, 0.0, 1.0, -1.0);
    const auto cert = probe_one_sided_lipschitz(p, 5.0, 1000, 3);
    CHECK(cert.c_estimate <= -1.0 + 1e-9);
    CHECK(cert.probes == 1000);
    CHECK(cert.domain_radius == 5.0);
  }
  SUBCASE("zero drift") {
    const Problem p = make_scalar_problem("zero", {[](double) { return 0.0; }, {},
                                                   [](double) { return 0.0; },
                                                   [](double) { return 0.0; }},
                                          0.0, 1.0, 0.0, 1.0);
    CHECK(probe_one_sided_lipschitz(p, 1.0, 100, 1).c_estimate == 0.0);
    CHECK(p.one_sided_lipschitz == 0.0);
  }
  SUBCASE("Ginzburg-Landau drift against a dense grid scan") {
    const Problem p = preset(kGinzburgLandauJump);
    // Oracle: sup over pairs of 2 - (x^2 + xy + y^2) on a grid of [-10, 10]^2.
    double grid_sup = -1e300;
    for (int i = 0; i <= 400; ++i) {
      for (int j = 0; j <= 400; ++j) {
        if (i == j) continue;
        const double x = -10.0 + 0.05 * i, y = -10.0 + 0.05 * j;
        grid_sup = std::max(grid_sup, ((x - y) * (drift1(p, x) - drift1(p, y))) / ((x - y) * (x - y)));
      }
    }
    CHECK(grid_sup <= 2.0 + 1e-12);
    CHECK(grid_sup > 1.99);
    const auto cert = probe_one_sided_lipschitz(p, 10.0, 4000, 11);
    CHECK(cert.c_estimate <= 2.0 + 1e-9);
    CHECK(cert.c_estimate > 1.5);
  }
  SUBCASE("deterministic in seed") {
    const Problem p = preset(kCubicAdditiveJump);
    CHECK(probe_one_sided_lipschitz(p, 3.0, 500, 9).c_estimate ==
          probe_one_sided_lipschitz(p, 3.0, 500, 9).c_estimate);
  }
  SUBCASE("NaN drift is reported with the probe point") {
    const Problem p = make_scalar_problem("nan", {[](double) { return std::nan(""); }, {},
                                                  [](double) { return 0.0; },
                                                  [](double) { return 0.0; }},
                                          0.0, 1.0, 0.0, 1.0, 0.0);
    CHECK_THROWS_AS((void)probe_one_sided_lipschitz(p, 1.0, 10, 0), EvaluationError);
  }
  SUBCASE("preconditions") {
    const Problem p = preset(kCubicAdditiveJump);
    CHECK_THROWS_AS((void)probe_one_sided_lipschitz(p, 1.0, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS((void)probe_one_sided_lipschitz(p, 0.0, 10, 0), std::invalid_argument);
  }
}

TEST_CASE("validate rejects malformed problems") {
  Problem p = preset(kCubicAdditiveJump);
  p.x0 = {0.0, 1.0};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = preset(kCubicAdditiveJump);
  p.brownian_dim = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = preset(kCubicAdditiveJump);
  p.drift = nullptr;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
