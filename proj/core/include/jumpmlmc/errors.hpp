#pragma once

#include <cstddef>
#include <exception>
#include <optional>
#include <string>

namespace jumpmlmc {

// Base for failures that abort a path or a run. Callers further up the stack
// annotate the same exception object (step index, fine/coarse role) and
// rethrow it with `throw;`, so the dynamic type survives.
class SimulationError : public std::exception {
 public:
  explicit SimulationError(std::string message);

  const char* what() const noexcept override { return full_.c_str(); }
  const std::string& message() const noexcept { return message_; }

  std::optional<std::size_t> step_index() const noexcept { return step_; }
  const std::string& role() const noexcept { return role_; }

  void annotate_step(std::size_t step);
  void annotate_role(std::string role);

 private:
  void rebuild();

  std::string message_;
  std::string full_;
  std::optional<std::size_t> step_;
  std::string role_;
};

// Step size violates h * c < 1, so the implicit drift map is not well posed.
class NonContractive : public SimulationError {
 public:
  NonContractive(double h, double c);
  double step_size() const noexcept { return h_; }
  double lipschitz() const noexcept { return c_; }

 private:
  double h_;
  double c_;
};

// Newton and the bisection fallback both failed to meet the residual bound.
class SolverDiverged : public SimulationError {
 public:
  SolverDiverged(double residual, std::size_t iterations);
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// An explicit path left the finite range or crossed the explosion bound.
class PathExploded : public SimulationError {
 public:
  PathExploded(double value, std::size_t step_index);
  double value() const noexcept { return value_; }

 private:
  double value_;
};

// A coefficient returned NaN.
class EvaluationError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

}  // namespace jumpmlmc
