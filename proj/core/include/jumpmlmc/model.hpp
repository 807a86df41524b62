#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace jumpmlmc {

using State = std::vector<double>;

// Coefficient callables write into a caller-owned buffer so the inner loops
// never allocate. Matrices are row-major.
using VectorField = std::function<void(std::span<const double> x, std::span<double> out)>;

// dX = mu(X-) dt + sigma(X-) dW + nu(X-) dN on [t0, T], with N a scalar
// compensated Poisson process of the given intensity.
struct Problem {
  std::string name;
  std::size_t dim = 1;
  std::size_t brownian_dim = 1;

  VectorField drift;           // out: dim
  VectorField drift_jacobian;  // optional; out: dim x dim
  VectorField diffusion;       // out: dim x brownian_dim
  VectorField jump_coeff;      // out: dim

  double intensity = 0.0;
  State x0;
  double t0 = 0.0;
  double T = 1.0;

  // One-sided Lipschitz constant c of the drift. NaN means "not declared";
  // finalize() fills it by probing.
  double one_sided_lipschitz = std::numeric_limits<double>::quiet_NaN();

  double horizon() const noexcept { return T - t0; }
  bool has_jacobian() const noexcept { return static_cast<bool>(drift_jacobian); }

  // Throws std::invalid_argument on a violated structural invariant.
  void validate() const;
};

struct OneSidedLipschitzCert {
  double c_estimate;
  std::size_t probes;
  double domain_radius;
};

// Max over random pairs in the ball of the given radius of
// <x - y, mu(x) - mu(y)> / |x - y|^2. Deterministic in seed.
OneSidedLipschitzCert probe_one_sided_lipschitz(const Problem& p, double radius, std::size_t n,
                                                std::uint64_t seed);

// Validates and, when c is undeclared, fills it from a probe over radius 10.
Problem finalize(Problem p);

inline constexpr std::string_view kGinzburgLandauJump = "ginzburg_landau_jump";
inline constexpr std::string_view kCubicAdditiveJump = "cubic_additive_jump";
inline constexpr std::string_view kLinearJumpOracle = "linear_jump_oracle";

std::vector<std::string> preset_names();

// Parameter overrides, e.g. {"a", 0.0} for the linear oracle or {"lambda", 0}
// for any preset. Unknown keys are rejected.
using PresetOverrides = std::map<std::string, double>;

Problem preset(std::string_view name, const PresetOverrides& overrides = {});

// Closed-form E[X_T] of linear_jump_oracle for the given overrides.
double linear_oracle_mean(const PresetOverrides& overrides = {});

// Generic scalar constructor used by tests and presets.
struct ScalarCoefficients {
  std::function<double(double)> drift;
  std::function<double(double)> drift_derivative;  // may be empty
  std::function<double(double)> diffusion;
  std::function<double(double)> jump;
};

Problem make_scalar_problem(std::string name, const ScalarCoefficients& coeffs, double intensity,
                            double x0, double t0, double T,
                            double one_sided_lipschitz = std::numeric_limits<double>::quiet_NaN());

}  // namespace jumpmlmc
