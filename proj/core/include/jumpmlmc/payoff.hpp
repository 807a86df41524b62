#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jumpmlmc/schemes.hpp"

namespace jumpmlmc {

using StateMap = std::function<double(std::span<const double>)>;

double squared_norm(std::span<const double> x) noexcept;

// Path functional f = F(g(path)) with g a state map.
struct Payoff {
  enum class Kind { Terminal, RunningSup, RunningMean };

  Kind kind = Kind::Terminal;
  StateMap inner = squared_norm;
  // c' of the local Lipschitz bound
  // |f(x) - f(y)| <= c' (1 + |x|^c' + |y|^c') |x - y|_sup.
  double growth_exponent = 1.0;
  std::string id;

  static Payoff terminal(StateMap g = squared_norm, double growth = 1.0);
  static Payoff running_sup(StateMap g = squared_norm, double growth = 1.0);
  static Payoff running_mean(StateMap g = squared_norm, double growth = 1.0);
};

// CLI identifiers: terminal_sq, sup_sq, mean_sq, terminal_id.
Payoff payoff_from_id(std::string_view id);
std::vector<std::string> payoff_ids();

// Terminal: g(last). RunningSup: max of g over every grid state.
// RunningMean: average of g over the n_steps left endpoints.
double evaluate(const Payoff& f, const Path& path);
double evaluate(const Payoff& f, const Path& path, std::span<const double> times);

}  // namespace jumpmlmc
