#include "jumpmlmc/payoff.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace jumpmlmc {

double squared_norm(std::span<const double> x) noexcept {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

Payoff Payoff::terminal(StateMap g, double growth) {
  return {Kind::Terminal, std::move(g), growth, "terminal"};
}

Payoff Payoff::running_sup(StateMap g, double growth) {
  return {Kind::RunningSup, std::move(g), growth, "sup"};
}

Payoff Payoff::running_mean(StateMap g, double growth) {
  return {Kind::RunningMean, std::move(g), growth, "mean"};
}

std::vector<std::string> payoff_ids() { return {"terminal_sq", "sup_sq", "mean_sq", "terminal_id"}; }

Payoff payoff_from_id(std::string_view id) {
  Payoff f;
  if (id == "terminal_sq") {
    f = Payoff::terminal();
  } else if (id == "sup_sq") {
    f = Payoff::running_sup();
  } else if (id == "mean_sq") {
    f = Payoff::running_mean();
  } else if (id == "terminal_id") {
    f = Payoff::terminal([](std::span<const double> x) { return x[0]; });
  } else {
    throw std::invalid_argument("unknown payoff '" + std::string(id) +
                                "'; valid payoffs: terminal_sq, sup_sq, mean_sq, terminal_id");
  }
  f.id = std::string(id);
  return f;
}

double evaluate(const Payoff& f, const Path& path) {
  if (path.size() == 0) throw std::invalid_argument("evaluate: empty path");
  switch (f.kind) {
    case Payoff::Kind::Terminal:
      return f.inner(path.back());
    case Payoff::Kind::RunningSup: {
      double best = f.inner(path[0]);
      for (std::size_t n = 1; n < path.size(); ++n) best = std::max(best, f.inner(path[n]));
      return best;
    }
    case Payoff::Kind::RunningMean: {
      // Left endpoints of the piecewise-constant interpolant.
      const std::size_t n_steps = path.n_steps();
      if (n_steps == 0) return f.inner(path[0]);
      double sum = 0.0;
      for (std::size_t n = 0; n < n_steps; ++n) sum += f.inner(path[n]);
      return sum / static_cast<double>(n_steps);
    }
  }
  return 0.0;
}

double evaluate(const Payoff& f, const Path& path, std::span<const double> times) {
  if (times.size() != path.size())
    throw std::invalid_argument("evaluate: path and time grid lengths differ");
  return evaluate(f, path);
}

}  // namespace jumpmlmc
