#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jumpmlmc/model.hpp"
#include "jumpmlmc/noise.hpp"

namespace jumpmlmc {

enum class SchemeKind { Euler, TamedEuler, SSBE, BE };

std::string_view to_string(SchemeKind kind);
// Accepts the CLI identifiers euler, tamed, ssbe, be.
SchemeKind parse_scheme(std::string_view id);
bool is_implicit(SchemeKind kind) noexcept;

struct ImplicitSolveConfig {
  double tol = 1e-12;
  int max_newton_iters = 50;
  int max_bisection_iters = 200;
  double bracket_expansion = 2.0;

  void validate() const;
};

struct SchemeConfig {
  ImplicitSolveConfig solver;
  // Explicit schemes report PathExploded once |state| exceeds this bound.
  // Implicit schemes only fail on non-finite values.
  double explosion_bound = 1e8;
};

// Scratch buffers for one path; sized for a problem's dimensions.
class StepWorkspace {
 public:
  explicit StepWorkspace(const Problem& p);

 private:
  friend struct StepKernel;
  friend void step_into(const Problem&, SchemeKind, std::span<const double>, double,
                        std::span<const double>, std::uint32_t, const struct SchemeConfig&,
                        StepWorkspace&, std::span<double>);
  std::vector<double> a_, b_, c_, d_, jac_, sigma_, delta_;
};

// Solves y - h * mu(y) = x. Newton from y = x (analytic or finite-difference
// Jacobian) with step halving when the residual does not decrease; in one
// dimension falls back to bracketed bisection. The returned y satisfies
// |y - h mu(y) - x| <= max(tol, rounding floor), where the floor is a few ulps
// of |x| + |y| + h |mu(y)|.
State implicit_drift_solve(const Problem& p, std::span<const double> x, double h,
                           const ImplicitSolveConfig& cfg = {});
void implicit_drift_solve_into(const Problem& p, std::span<const double> x, double h,
                               const ImplicitSolveConfig& cfg, StepWorkspace& ws,
                               std::span<double> y);

// Residual |y - h mu(y) - x| (Euclidean norm).
double implicit_residual(const Problem& p, std::span<const double> x, std::span<const double> y,
                         double h);

// One step. The jump increment is compensated: dp - intensity * h.
State step(const Problem& p, SchemeKind kind, std::span<const double> y, double h,
           std::span<const double> dw, std::uint32_t dp, const SchemeConfig& cfg = {});
void step_into(const Problem& p, SchemeKind kind, std::span<const double> y, double h,
               std::span<const double> dw, std::uint32_t dp, const SchemeConfig& cfg,
               StepWorkspace& ws, std::span<double> out);

// States on a uniform grid, stored row-major (n_states x dim).
class Path {
 public:
  Path() = default;
  Path(std::size_t dim, std::size_t n_states, double t0, double h);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t n_steps() const noexcept { return size() == 0 ? 0 : size() - 1; }
  double h() const noexcept { return h_; }
  double t0() const noexcept { return t0_; }

  std::span<const double> operator[](std::size_t n) const { return {data_.data() + n * dim_, dim_}; }
  std::span<double> operator[](std::size_t n) { return {data_.data() + n * dim_, dim_}; }
  std::span<const double> back() const { return (*this)[size() - 1]; }

  double time(std::size_t n) const noexcept { return t0_ + static_cast<double>(n) * h_; }
  std::vector<double> times() const;

  const std::vector<double>& data() const noexcept { return data_; }

  static Path from_scalars(std::span<const double> xs, double t0 = 0.0, double h = 1.0);

  bool operator==(const Path&) const = default;

 private:
  std::size_t dim_ = 0;
  double t0_ = 0.0;
  double h_ = 1.0;
  std::vector<double> data_;
};

// path[0] = x0, path[n + 1] = step(path[n]). Errors carry the step index.
Path simulate_path(const Problem& p, SchemeKind kind, const NoiseGrid& g,
                   const SchemeConfig& cfg = {});

}  // namespace jumpmlmc
