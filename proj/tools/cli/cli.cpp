#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "jumpmlmc/csv.hpp"
#include "jumpmlmc/errors.hpp"
#include "jumpmlmc/payoff.hpp"

namespace jumpmlmc::cli {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  return out;
}

}  // namespace

PresetOverrides RunConfig::parsed_overrides() const {
  PresetOverrides out;
  for (const auto& entry : overrides) {
    for (const auto& kv : split(entry, ',')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("override '" + kv + "' is not of the form key=value");
      out[trim(kv.substr(0, eq))] = csv::parse_double(trim(kv.substr(eq + 1)));
    }
  }
  return out;
}

Problem RunConfig::problem() const { return jumpmlmc::preset(preset, parsed_overrides()); }

void RunConfig::validate() const {
  if (seed < 0) throw std::invalid_argument("--seed is required (a non-negative integer)");
  (void)problem();
  (void)parse_scheme(scheme);
  (void)payoff_from_id(payoff);
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("--eps must be > 0");
  if (L_start < 0 || L_max < L_start || L_max > kMaxLevel)
    throw std::invalid_argument("require 0 <= --L-start <= --L-max <= 30");
  if (initial_samples < 2) throw std::invalid_argument("--initial-samples must be >= 2");
  if (base_level > L_max) throw std::invalid_argument("--base-level must not exceed --L-max");
  if (!(alpha > 0.0)) throw std::invalid_argument("--alpha must be > 0");
  if (threads < 1) throw std::invalid_argument("--threads must be >= 1");
  if (mode == Mode::Theoretical) (void)theoretical_schedule(eps, problem().horizon());
}

AdaptiveConfig RunConfig::adaptive() const {
  AdaptiveConfig cfg;
  cfg.L_start = L_start;
  cfg.L_max = L_max;
  cfg.initial_samples = initial_samples;
  cfg.alpha_assumed = alpha;
  cfg.base_level = base_level;
  cfg.run.seed = static_cast<std::uint64_t>(seed);
  cfg.run.threads = threads;
  return cfg;
}

void write_levels(std::ostream& out, const MlmcResult& r) {
  out << kLevelsHeader << "\r\n";
  csv::Writer w(out);
  for (const auto& s : r.levels) {
    w.row({csv::format(s.level), csv::format(s.n_samples), csv::format(s.mean_diff()),
           csv::format(s.var_diff()), csv::format(s.mean_fine()), csv::format(s.var_fine()),
           csv::format(s.cost_steps), csv::format(s.n_failures)});
  }
}

void write_summary(std::ostream& out, const MlmcResult& r) {
  out << kSummaryHeader << "\r\n";
  csv::Writer(out).row({csv::format(r.estimate), csv::format(r.epsilon_target),
                        csv::format(r.L_final), csv::format(r.total_cost_steps),
                        csv::format(r.variance_of_estimator), csv::format(r.bias_estimate),
                        csv::format(r.wall_time_s), csv::format(r.seed)});
}

void write_orders(std::ostream& out, const ConvergenceReport& report) {
  out << kOrdersHeader << "\r\n";
  csv::Writer w(out);
  for (const auto& l : report.levels) {
    w.row({csv::format(l.level), csv::format(l.samples), csv::format(l.failures),
           csv::format(l.mean_diff), csv::format(l.var_diff), csv::format(l.log2_abs_mean),
           csv::format(l.log2_var), csv::format(l.cost_steps), l.error});
  }
}

void write_orders_fit(std::ostream& out, const ConvergenceReport& report) {
  out << kOrdersFitHeader << "\r\n";
  csv::Writer(out).row({std::string(to_string(report.scheme)), report.payoff,
                        csv::format(report.fit.alpha_hat), csv::format(report.fit.beta_hat),
                        csv::format(report.fit.fit_lmin), csv::format(report.fit.fit_lmax)});
}

namespace {

void add_problem_options(CLI::App& app, RunConfig& cfg) {
  app.add_option("--preset", cfg.preset, "Problem preset (see `presets`)");
  app.add_option("--override", cfg.overrides,
                 "Preset parameter overrides, key=value[,key=value...]");
  app.add_option("--payoff", cfg.payoff, "terminal_sq | sup_sq | mean_sq | terminal_id");
  app.add_option("--seed", cfg.seed, "Root seed for every random stream (required)");
  app.add_option("--output,-o", cfg.output, "Directory for CSV output");
  app.add_option("--threads", cfg.threads, "Worker threads")->envname("MLMC_THREADS");
  app.add_option("--config", cfg.config_file, "key=value configuration file; flags take precedence");
}

void add_adaptive_options(CLI::App& app, RunConfig& cfg) {
  app.add_option("--eps", cfg.eps, "Target root mean square error");
  app.add_option("--L-start", cfg.L_start, "Initial finest level");
  app.add_option("--L-max", cfg.L_max, "Maximum level");
  app.add_option("--initial-samples", cfg.initial_samples, "Pilot samples per initial level");
  app.add_option("--base-level", cfg.base_level,
                 "Coarsest level (default: smallest level passing the implicit step guard)");
  app.add_option("--alpha", cfg.alpha, "Assumed weak order for the bias test");
}

void warn_failures(std::ostream& err, const std::string& label, std::uint64_t failures) {
  if (failures > 0)
    err << "warning: " << label << ": " << failures << " paths failed and were excluded\n";
}

int cmd_presets(std::ostream& out) {
  out << "ginzburg_landau_jump  dX = (2X - X^3)dt + 2X dW + X dN, lambda=1, X0=1, t in [0,1]\n"
      << "cubic_additive_jump   dX = (X - X^3)dt + dW + X dN, lambda=1, X0=0, t in [0,1]\n"
      << "linear_jump_oracle    dX = aX dt + bX dW + kX dN, a=0.05 b=0.2 k=0.1, lambda=1, X0=1,"
         " E[X_1] = exp(a)\n"
      << "overrides: lambda, x0, t0, T (all presets); a, b, k (linear_jump_oracle)\n";
  return kExitOk;
}

int cmd_estimate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  cfg.validate();
  const Problem p = cfg.problem();
  const SchemeKind kind = parse_scheme(cfg.scheme);
  const Payoff f = payoff_from_id(cfg.payoff);

  MlmcResult r;
  if (cfg.mode == Mode::Adaptive) {
    r = run_adaptive(p, kind, f, cfg.eps, cfg.adaptive());
  } else {
    RunOptions opts;
    opts.seed = static_cast<std::uint64_t>(cfg.seed);
    opts.threads = cfg.threads;
    r = run_fixed_schedule(p, kind, f, theoretical_schedule(cfg.eps, p.horizon()), opts, cfg.eps);
  }

  {
    auto levels = open_output(cfg.output, "levels.csv");
    write_levels(levels, r);
    auto summary = open_output(cfg.output, "summary.csv");
    write_summary(summary, r);
  }
  warn_failures(err, cfg.scheme, r.total_failures());
  out << "estimate " << csv::format(r.estimate) << " (L_final " << r.L_final << ", cost "
      << r.total_cost_steps << " steps, failures " << r.total_failures() << ")\n";
  if (!r.converged) {
    err << "bias test not converged at L_max = " << cfg.L_max << "\n";
    return kExitBiasNotConverged;
  }
  return kExitOk;
}

struct OrdersArgs {
  int level_min = 1;
  int level_max = 8;
  std::uint64_t samples = 10000;
  int fit_min = 3;
  int fit_max = 8;
  bool self_test = false;
};

int cmd_orders(const RunConfig& cfg, const OrdersArgs& args, std::ostream& out) {
  ConvergenceReport report;
  if (args.self_test) {
    // Exact geometric data: means 2^-l and variances 2^-2l give alpha 1, beta 2.
    const std::vector<int> levels{1, 2, 3};
    const std::vector<double> means{0.5, 0.25, 0.125};
    const std::vector<double> vars{0.25, 0.0625, 0.015625};
    report.scheme = parse_scheme(cfg.scheme);
    report.payoff = "synthetic";
    for (std::size_t i = 0; i < levels.size(); ++i) {
      LevelOrderStats row;
      row.level = levels[i];
      row.mean_diff = means[i];
      row.var_diff = vars[i];
      row.log2_abs_mean = std::log2(means[i]);
      row.log2_var = std::log2(vars[i]);
      report.levels.push_back(row);
    }
    report.fit = fit_orders(levels, means, vars, 1, 3);
  } else {
    cfg.validate();
    OrdersConfig oc;
    oc.level_min = args.level_min;
    oc.level_max = args.level_max;
    oc.samples_per_level = args.samples;
    oc.fit_lmin = args.fit_min;
    oc.fit_lmax = args.fit_max;
    oc.run.seed = static_cast<std::uint64_t>(cfg.seed);
    oc.run.threads = cfg.threads;
    report = estimate_orders(cfg.problem(), parse_scheme(cfg.scheme), payoff_from_id(cfg.payoff), oc);
  }
  {
    auto f = open_output(cfg.output, "orders.csv");
    write_orders(f, report);
    auto fit = open_output(cfg.output, "orders_fit.csv");
    write_orders_fit(fit, report);
  }
  out << "alpha_hat " << csv::format(report.fit.alpha_hat) << " beta_hat "
      << csv::format(report.fit.beta_hat) << " (levels " << report.fit.fit_lmin << ".."
      << report.fit.fit_lmax << ")\n";
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const std::string& schemes, const std::string& eps_list,
              std::ostream& out, std::ostream& err) {
  cfg.validate();
  std::vector<double> eps;
  for (const auto& e : split(eps_list, ',')) eps.push_back(csv::parse_double(e));
  std::vector<std::string> kinds = split(schemes, ',');
  if (kinds.empty()) kinds.push_back(cfg.scheme);
  const Problem p = cfg.problem();
  const Payoff f = payoff_from_id(cfg.payoff);

  auto table = open_output(cfg.output, "sweep.csv");
  auto fits = open_output(cfg.output, "sweep_fit.csv");
  table << kSweepHeader << "\r\n";
  fits << kSweepFitHeader << "\r\n";
  csv::Writer tw(table), fw(fits);
  for (const auto& k : kinds) {
    const SchemeKind kind = parse_scheme(k);
    const ComplexitySweep sweep = complexity_sweep(p, kind, f, eps, cfg.adaptive());
    for (const auto& rec : sweep.records) {
      tw.row({k, csv::format(rec.eps), csv::format(rec.total_cost_steps), csv::format(rec.wall_time_s),
              csv::format(rec.L_final), csv::format(rec.estimate), rec.converged ? "1" : "0",
              csv::format(rec.failures), rec.error});
      warn_failures(err, k, rec.failures);
    }
    fw.row({k, csv::format(sweep.cost_slope)});
    out << k << ": cost slope " << csv::format(sweep.cost_slope) << "\n";
  }
  return kExitOk;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  cfg.validate();
  const Problem p = cfg.problem();
  const Payoff f = payoff_from_id(cfg.payoff);
  const std::vector<std::string> kinds{"ssbe", "be", "tamed"};

  auto table = open_output(cfg.output, "compare.csv");
  table << kCompareHeader << "\r\n";
  csv::Writer tw(table);
  std::map<int, std::map<std::string, std::pair<double, std::uint64_t>>> per_level;
  for (const auto& k : kinds) {
    try {
      const MlmcResult r = run_adaptive(p, parse_scheme(k), f, cfg.eps, cfg.adaptive());
      tw.row({k, csv::format(r.estimate), csv::format(r.L_final), csv::format(r.total_cost_steps),
              csv::format(r.variance_of_estimator), csv::format(r.bias_estimate),
              r.converged ? "1" : "0", csv::format(r.total_failures()),
              csv::format(r.wall_time_s), ""});
      for (const auto& s : r.levels) per_level[s.level][k] = {s.var_diff(), s.cost_steps};
      warn_failures(err, k, r.total_failures());
      out << k << ": estimate " << csv::format(r.estimate) << ", cost " << r.total_cost_steps
          << "\n";
    } catch (const SimulationError& e) {
      tw.row({k, "nan", "", "", "nan", "nan", "0", "", "", e.what()});
      err << k << ": " << e.what() << "\n";
    }
  }

  auto levels = open_output(cfg.output, "compare_levels.csv");
  std::string header = "level";
  for (const auto& k : kinds) header += ",var_" + k + ",cost_" + k;
  levels << header << "\r\n";
  csv::Writer lw(levels);
  for (const auto& [level, by_scheme] : per_level) {
    std::vector<std::string> row{csv::format(level)};
    for (const auto& k : kinds) {
      const auto it = by_scheme.find(k);
      if (it == by_scheme.end()) {
        row.emplace_back();
        row.emplace_back();
      } else {
        row.push_back(csv::format(it->second.first));
        row.push_back(csv::format(it->second.second));
      }
    }
    lw.row(row);
  }
  return kExitOk;
}

// Folds `--config FILE` into the argument list: every key=value line becomes
// `--key value` unless that flag is already on the command line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string file;
  for (auto it = args.begin(); it != args.end(); ++it) {
    if (*it == "--config" && std::next(it) != args.end()) {
      file = *std::next(it);
      break;
    }
    if (it->rfind("--config=", 0) == 0) {
      file = it->substr(9);
      break;
    }
  }
  if (file.empty()) return args;
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("cannot read config file " + file);
  const auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  std::vector<std::string> extra;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(file + ":" + std::to_string(number) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    const std::string flag = "--" + key;
    if (given(flag)) continue;
    extra.push_back(flag);
    extra.push_back(value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multilevel Monte Carlo for jump-diffusion SDEs with superlinear drift"};
  app.require_subcommand(1);

  auto* presets = app.add_subcommand("presets", "List problem presets");

  RunConfig est_cfg;
  std::string mode = "adaptive";
  auto* estimate = app.add_subcommand("estimate", "Run one MLMC estimation");
  add_problem_options(*estimate, est_cfg);
  add_adaptive_options(*estimate, est_cfg);
  estimate->add_option("--scheme", est_cfg.scheme, "euler | tamed | ssbe | be");
  estimate->add_option("--mode", mode, "adaptive | theoretical")
      ->check(CLI::IsMember({"adaptive", "theoretical"}));

  RunConfig ord_cfg;
  OrdersArgs ord_args;
  auto* orders = app.add_subcommand("orders", "Per-level convergence study and order fit");
  add_problem_options(*orders, ord_cfg);
  orders->add_option("--scheme", ord_cfg.scheme, "euler | tamed | ssbe | be");
  orders->add_option("--level-min", ord_args.level_min, "First level (>= 1)");
  orders->add_option("--level-max", ord_args.level_max, "Last level (<= 12)");
  orders->add_option("--samples", ord_args.samples, "Coupled samples per level");
  orders->add_option("--fit-min", ord_args.fit_min, "First level in the fit window");
  orders->add_option("--fit-max", ord_args.fit_max, "Last level in the fit window");
  orders->add_flag("--self-test", ord_args.self_test, "Fit injected exact geometric data");

  RunConfig sw_cfg;
  std::string sw_schemes, sw_eps = "0.1,0.05,0.02";
  auto* sweep = app.add_subcommand("sweep", "Cost against accuracy over a list of eps");
  add_problem_options(*sweep, sw_cfg);
  add_adaptive_options(*sweep, sw_cfg);
  sweep->add_option("--scheme", sw_cfg.scheme, "Scheme when --schemes is not given");
  sweep->add_option("--schemes", sw_schemes, "Comma-separated schemes");
  sweep->add_option("--eps-list", sw_eps, "Comma-separated descending eps values");

  RunConfig cmp_cfg;
  auto* compare = app.add_subcommand("compare", "Run ssbe, be and tamed on identical seeds");
  add_problem_options(*compare, cmp_cfg);
  add_adaptive_options(*compare, cmp_cfg);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (*presets) return cmd_presets(out);
    if (*estimate) {
      est_cfg.mode = mode == "theoretical" ? Mode::Theoretical : Mode::Adaptive;
      return cmd_estimate(est_cfg, out, err);
    }
    if (*orders) {
      if (!ord_args.self_test && ord_cfg.seed < 0)
        throw std::invalid_argument("--seed is required (a non-negative integer)");
      return cmd_orders(ord_cfg, ord_args, out);
    }
    if (*sweep) return cmd_sweep(sw_cfg, sw_schemes, sw_eps, out, err);
    if (*compare) return cmd_compare(cmp_cfg, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace jumpmlmc::cli
