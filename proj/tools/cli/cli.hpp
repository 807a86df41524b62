#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "jumpmlmc/analysis.hpp"
#include "jumpmlmc/mlmc.hpp"
#include "jumpmlmc/model.hpp"

namespace jumpmlmc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitBiasNotConverged = 2;

inline constexpr const char* kLevelsHeader =
    "level,M,mean_diff,var_diff,mean_fine,var_fine,cost_steps,failures";
inline constexpr const char* kSummaryHeader =
    "estimate,eps,L_final,total_cost,variance,bias_estimate,wall_time_s,seed";
inline constexpr const char* kOrdersHeader =
    "level,samples,failures,mean_diff,var_diff,log2_abs_mean,log2_var,cost_steps,error";
inline constexpr const char* kOrdersFitHeader = "scheme,payoff,alpha_hat,beta_hat,fit_lmin,fit_lmax";
inline constexpr const char* kSweepHeader =
    "scheme,eps,total_cost,wall_time_s,L_final,estimate,converged,failures,error";
inline constexpr const char* kSweepFitHeader = "scheme,cost_slope";
inline constexpr const char* kCompareHeader =
    "scheme,estimate,L_final,total_cost,variance,bias_estimate,converged,failures,wall_time_s,error";

enum class Mode { Adaptive, Theoretical };

struct RunConfig {
  std::string preset = "ginzburg_landau_jump";
  std::vector<std::string> overrides;  // "key=value", comma lists allowed
  std::string scheme = "ssbe";
  std::string payoff = "mean_sq";
  double eps = 0.05;
  std::int64_t seed = -1;  // required; -1 means "not given"
  int L_start = 2;
  int L_max = 10;
  std::uint64_t initial_samples = 10000;
  int base_level = -1;
  double alpha = 1.0;
  Mode mode = Mode::Adaptive;
  std::filesystem::path output = ".";
  unsigned threads = 1;
  std::string config_file;  // consumed before parsing

  // Checks every field against the library preconditions before any work.
  void validate() const;
  PresetOverrides parsed_overrides() const;
  Problem problem() const;
  AdaptiveConfig adaptive() const;
};

// Writers for the CSV schemas.
void write_levels(std::ostream& out, const MlmcResult& r);
void write_summary(std::ostream& out, const MlmcResult& r);
void write_orders(std::ostream& out, const ConvergenceReport& report);
void write_orders_fit(std::ostream& out, const ConvergenceReport& report);

// Entry point shared by the binary and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace jumpmlmc::cli
