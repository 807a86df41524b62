#include "jumpmlmc/errors.hpp"

#include <sstream>
#include <utility>

namespace jumpmlmc {

SimulationError::SimulationError(std::string message) : message_(std::move(message)) { rebuild(); }

void SimulationError::annotate_step(std::size_t step) {
  step_ = step;
  rebuild();
}

void SimulationError::annotate_role(std::string role) {
  role_ = std::move(role);
  rebuild();
}

void SimulationError::rebuild() {
  full_.clear();
  if (!role_.empty()) full_ += role_ + " path: ";
  if (step_) full_ += "step " + std::to_string(*step_) + ": ";
  full_ += message_;
}

namespace {

std::string describe_non_contractive(double h, double c) {
  std::ostringstream os;
  os << "non-contractive implicit step: h*c = " << h * c << " >= 1 (h = " << h << ", c = " << c
     << ")";
  return os.str();
}

std::string describe_diverged(double residual, std::size_t iterations) {
  std::ostringstream os;
  os << "implicit solver diverged after " << iterations << " iterations, residual " << residual;
  return os.str();
}

std::string describe_exploded(double value) {
  std::ostringstream os;
  os << "path exploded, state component " << value;
  return os.str();
}

}  // namespace

NonContractive::NonContractive(double h, double c)
    : SimulationError(describe_non_contractive(h, c)), h_(h), c_(c) {}

SolverDiverged::SolverDiverged(double residual, std::size_t iterations)
    : SimulationError(describe_diverged(residual, iterations)), residual_(residual) {}

PathExploded::PathExploded(double value, std::size_t step_index)
    : SimulationError(describe_exploded(value)), value_(value) {
  annotate_step(step_index);
}

}  // namespace jumpmlmc
