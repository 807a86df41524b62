#include "jumpmlmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "jumpmlmc/errors.hpp"
#include "jumpmlmc/random.hpp"

namespace jumpmlmc {

void Problem::validate() const {
  auto fail = [this](const std::string& what) {
    throw std::invalid_argument("problem '" + name + "': " + what);
  };
  if (dim < 1) fail("dim must be >= 1");
  if (brownian_dim < 1) fail("brownian_dim must be >= 1");
  if (!(intensity >= 0.0) || !std::isfinite(intensity)) fail("intensity must be finite and >= 0");
  if (!(T > t0) || !std::isfinite(T) || !std::isfinite(t0)) fail("requires finite t0 < T");
  if (x0.size() != dim) fail("x0 has the wrong dimension");
  if (!std::all_of(x0.begin(), x0.end(), [](double v) { return std::isfinite(v); }))
    fail("x0 must be finite");
  if (!drift || !diffusion || !jump_coeff) fail("drift, diffusion and jump_coeff are required");
}

OneSidedLipschitzCert probe_one_sided_lipschitz(const Problem& p, double radius, std::size_t n,
                                                std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("probe_one_sided_lipschitz: need at least 2 probes");
  if (!(radius > 0.0)) throw std::invalid_argument("probe_one_sided_lipschitz: radius must be > 0");

  const std::size_t d = p.dim;
  Xoshiro256 rng = make_stream(seed, 0x4C495053ULL, 0);
  std::vector<double> x(d), y(d), mx(d), my(d);

  auto eval = [&](const std::vector<double>& at, std::vector<double>& out) {
    p.drift(at, out);
    for (double v : out) {
      if (std::isnan(v)) {
        std::ostringstream os;
        os << "drift evaluated to NaN at probe point (";
        for (std::size_t i = 0; i < d; ++i) os << (i ? ", " : "") << at[i];
        os << ")";
        throw EvaluationError(os.str());
      }
    }
  };

  double c = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < d; ++i) x[i] = radius * (2.0 * rng.uniform() - 1.0);
    if (k % 2 == 0) {
      for (std::size_t i = 0; i < d; ++i) y[i] = radius * (2.0 * rng.uniform() - 1.0);
    } else {
      // Nearby pairs resolve the local derivative of the drift.
      const double delta = 1e-3 * radius;
      for (std::size_t i = 0; i < d; ++i) y[i] = x[i] + delta * (2.0 * rng.uniform() - 1.0);
    }
    double dist2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) dist2 += (x[i] - y[i]) * (x[i] - y[i]);
    if (dist2 == 0.0) continue;
    eval(x, mx);
    eval(y, my);
    double inner = 0.0;
    for (std::size_t i = 0; i < d; ++i) inner += (x[i] - y[i]) * (mx[i] - my[i]);
    c = std::max(c, inner / dist2);
  }
  if (!std::isfinite(c)) c = 0.0;
  return {c, n, radius};
}

Problem finalize(Problem p) {
  p.validate();
  if (std::isnan(p.one_sided_lipschitz)) {
    p.one_sided_lipschitz = probe_one_sided_lipschitz(p, 10.0, 4096, 0).c_estimate;
  }
  return p;
}

Problem make_scalar_problem(std::string name, const ScalarCoefficients& coeffs, double intensity,
                            double x0, double t0, double T, double one_sided_lipschitz) {
  Problem p;
  p.name = std::move(name);
  p.dim = 1;
  p.brownian_dim = 1;
  p.drift = [f = coeffs.drift](std::span<const double> x, std::span<double> out) {
    out[0] = f(x[0]);
  };
  if (coeffs.drift_derivative) {
    p.drift_jacobian = [f = coeffs.drift_derivative](std::span<const double> x,
                                                     std::span<double> out) { out[0] = f(x[0]); };
  }
  p.diffusion = [f = coeffs.diffusion](std::span<const double> x, std::span<double> out) {
    out[0] = f(x[0]);
  };
  p.jump_coeff = [f = coeffs.jump](std::span<const double> x, std::span<double> out) {
    out[0] = f(x[0]);
  };
  p.intensity = intensity;
  p.x0 = {x0};
  p.t0 = t0;
  p.T = T;
  p.one_sided_lipschitz = one_sided_lipschitz;
  return finalize(std::move(p));
}

std::vector<std::string> preset_names() {
  return {std::string(kGinzburgLandauJump), std::string(kCubicAdditiveJump),
          std::string(kLinearJumpOracle)};
}

namespace {

struct CommonParams {
  double lambda = 1.0;
  double x0 = 0.0;
  double t0 = 0.0;
  double T = 1.0;
};

// Pulls the overrides shared by every preset and returns what is left.
PresetOverrides take_common(const PresetOverrides& in, CommonParams& common) {
  PresetOverrides rest;
  for (const auto& [key, value] : in) {
    if (key == "lambda") {
      common.lambda = value;
    } else if (key == "x0") {
      common.x0 = value;
    } else if (key == "t0") {
      common.t0 = value;
    } else if (key == "T") {
      common.T = value;
    } else {
      rest.emplace(key, value);
    }
  }
  return rest;
}

void reject_unknown(std::string_view preset_name, const PresetOverrides& rest) {
  if (rest.empty()) return;
  std::string keys;
  for (const auto& [key, value] : rest) keys += (keys.empty() ? "" : ", ") + key;
  throw std::invalid_argument("preset '" + std::string(preset_name) +
                              "' does not accept override(s): " + keys);
}

struct LinearParams {
  double a = 0.05;
  double b = 0.2;
  double k = 0.1;
};

LinearParams take_linear(PresetOverrides& rest) {
  LinearParams lp;
  for (auto it = rest.begin(); it != rest.end();) {
    if (it->first == "a") {
      lp.a = it->second;
    } else if (it->first == "b") {
      lp.b = it->second;
    } else if (it->first == "k") {
      lp.k = it->second;
    } else {
      ++it;
      continue;
    }
    it = rest.erase(it);
  }
  return lp;
}

}  // namespace

Problem preset(std::string_view name, const PresetOverrides& overrides) {
  CommonParams common;
  if (name == kGinzburgLandauJump) {
    common.x0 = 1.0;
    reject_unknown(name, take_common(overrides, common));
    ScalarCoefficients c{
        [](double x) { return 2.0 * x - x * x * x; },
        [](double x) { return 2.0 - 3.0 * x * x; },
        [](double x) { return 2.0 * x; },
        [](double x) { return x; },
    };
    return make_scalar_problem(std::string(name), c, common.lambda, common.x0, common.t0, common.T,
                               2.0);
  }
  if (name == kCubicAdditiveJump) {
    common.x0 = 0.0;
    reject_unknown(name, take_common(overrides, common));
    ScalarCoefficients c{
        [](double x) { return x - x * x * x; },
        [](double x) { return 1.0 - 3.0 * x * x; },
        [](double) { return 1.0; },
        [](double x) { return x; },
    };
    return make_scalar_problem(std::string(name), c, common.lambda, common.x0, common.t0, common.T,
                               1.0);
  }
  if (name == kLinearJumpOracle) {
    common.x0 = 1.0;
    PresetOverrides rest = take_common(overrides, common);
    const LinearParams lp = take_linear(rest);
    reject_unknown(name, rest);
    ScalarCoefficients c{
        [a = lp.a](double x) { return a * x; },
        [a = lp.a](double) { return a; },
        [b = lp.b](double x) { return b * x; },
        [k = lp.k](double x) { return k * x; },
    };
    return make_scalar_problem(std::string(name), c, common.lambda, common.x0, common.t0, common.T,
                               lp.a);
  }
  std::string valid;
  for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'; valid presets: " + valid);
}

double linear_oracle_mean(const PresetOverrides& overrides) {
  CommonParams common;
  common.x0 = 1.0;
  PresetOverrides rest = take_common(overrides, common);
  const LinearParams lp = take_linear(rest);
  reject_unknown(kLinearJumpOracle, rest);
  // The compensated jump term has zero mean, so E[X_t] solves m' = a m.
  return common.x0 * std::exp(lp.a * (common.T - common.t0));
}

}  // namespace jumpmlmc
