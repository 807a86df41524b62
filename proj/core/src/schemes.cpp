#include "jumpmlmc/schemes.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "jumpmlmc/errors.hpp"

namespace jumpmlmc {

std::string_view to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Euler: return "euler";
    case SchemeKind::TamedEuler: return "tamed";
    case SchemeKind::SSBE: return "ssbe";
    case SchemeKind::BE: return "be";
  }
  return "unknown";
}

SchemeKind parse_scheme(std::string_view id) {
  if (id == "euler") return SchemeKind::Euler;
  if (id == "tamed") return SchemeKind::TamedEuler;
  if (id == "ssbe") return SchemeKind::SSBE;
  if (id == "be") return SchemeKind::BE;
  throw std::invalid_argument("unknown scheme '" + std::string(id) +
                              "'; valid schemes: euler, tamed, ssbe, be");
}

bool is_implicit(SchemeKind kind) noexcept {
  return kind == SchemeKind::SSBE || kind == SchemeKind::BE;
}

void ImplicitSolveConfig::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("solver tol must be > 0");
  if (max_newton_iters < 1 || max_bisection_iters < 1)
    throw std::invalid_argument("solver iteration counts must be >= 1");
  if (!(bracket_expansion > 1.0)) throw std::invalid_argument("bracket_expansion must be > 1");
}

StepWorkspace::StepWorkspace(const Problem& p)
    : a_(p.dim), b_(p.dim), c_(p.dim), d_(p.dim), jac_(p.dim * p.dim),
      sigma_(p.dim * p.brownian_dim), delta_(p.dim) {}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

// Inner loops, with access to the workspace buffers.
struct StepKernel {
  const Problem& p;
  StepWorkspace& ws;
  const ImplicitSolveConfig& cfg;

  // g(y) = y - h mu(y) - x written into res; returns its norm. mu(y) is left in ws.d_.
  double residual(std::span<const double> x, std::span<const double> y, double h,
                  std::span<double> res, double& scale) {
    p.drift(y, ws.d_);
    double s = 0.0;
    scale = 0.0;
    for (std::size_t i = 0; i < p.dim; ++i) {
      res[i] = y[i] - h * ws.d_[i] - x[i];
      s += res[i] * res[i];
      scale += std::abs(x[i]) + std::abs(y[i]) + std::abs(h * ws.d_[i]);
    }
    return std::sqrt(s);
  }

  static double rounding_floor(double scale) { return 8.0 * kEps * scale; }

  void jacobian(std::span<const double> y) {
    const std::size_t d = p.dim;
    if (p.has_jacobian()) {
      p.drift_jacobian(y, ws.jac_);
      return;
    }
    // Central differences, column by column.
    std::vector<double> probe(y.begin(), y.end());
    std::vector<double> plus(d), minus(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double e = std::cbrt(kEps) * std::max(1.0, std::abs(y[j]));
      probe[j] = y[j] + e;
      p.drift(probe, plus);
      probe[j] = y[j] - e;
      p.drift(probe, minus);
      probe[j] = y[j];
      for (std::size_t i = 0; i < d; ++i) ws.jac_[i * d + j] = (plus[i] - minus[i]) / (2.0 * e);
    }
  }

  void solve(std::span<const double> x, double h, std::span<double> y) {
    const double c = p.one_sided_lipschitz;
    if (std::isnan(c))
      throw std::logic_error("problem '" + p.name + "' has no one-sided Lipschitz constant");
    if (h * c >= 1.0) throw NonContractive(h, c);
    if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); }))
      throw PathExploded(max_abs(x), 0);

    if (p.dim == 1) {
      solve_scalar(x[0], h, y[0]);
    } else {
      solve_vector(x, h, y);
    }
  }

  double mu1(double v) {
    ws.a_[0] = v;
    p.drift(std::span<const double>(ws.a_.data(), 1), std::span<double>(ws.d_.data(), 1));
    return ws.d_[0];
  }

  double dmu1(double v) {
    if (p.has_jacobian()) {
      ws.a_[0] = v;
      p.drift_jacobian(std::span<const double>(ws.a_.data(), 1),
                       std::span<double>(ws.jac_.data(), 1));
      return ws.jac_[0];
    }
    const double e = std::cbrt(kEps) * std::max(1.0, std::abs(v));
    return (mu1(v + e) - mu1(v - e)) / (2.0 * e);
  }

  void solve_scalar(double x, double h, double& y_out) {
    auto g = [&](double v, double& scale) {
      const double hm = h * mu1(v);
      scale = std::abs(x) + std::abs(v) + std::abs(hm);
      return v - hm - x;
    };

    double y = x;
    double scale = 0.0;
    double r = g(y, scale);
    int iters = 0;
    for (; iters < cfg.max_newton_iters; ++iters) {
      if (std::abs(r) <= std::max(cfg.tol, rounding_floor(scale))) {
        y_out = y;
        return;
      }
      const double jac = 1.0 - h * dmu1(y);
      if (!(jac > 0.0) || !std::isfinite(jac)) break;
      const double full = r / jac;
      double t = 1.0;
      bool accepted = false;
      for (int halvings = 0; halvings < 40; ++halvings, t *= 0.5) {
        const double y_try = y - t * full;
        double s_try = 0.0;
        const double r_try = g(y_try, s_try);
        if (std::isfinite(r_try) && std::abs(r_try) < std::abs(r)) {
          y = y_try;
          r = r_try;
          scale = s_try;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
    if (std::abs(r) <= std::max(cfg.tol, rounding_floor(scale))) {
      y_out = y;
      return;
    }
    y_out = bisect(x, h, iters);
  }

  // g is increasing when h c < 1, so expand a bracket around x until g
  // changes sign, then bisect.
  double bisect(double x, double h, int newton_iters) {
    double scale = 0.0;
    auto g = [&](double v) {
      const double hm = h * mu1(v);
      scale = std::abs(x) + std::abs(v) + std::abs(hm);
      return v - hm - x;
    };
    double width = std::max(1.0, std::abs(x));
    double lo = x - width, hi = x + width;
    double glo = g(lo), ghi = g(hi);
    int expansions = 0;
    while (!(glo <= 0.0 && ghi >= 0.0)) {
      if (++expansions > cfg.max_bisection_iters || !std::isfinite(width))
        throw SolverDiverged(std::abs(g(x)), static_cast<std::size_t>(newton_iters));
      width *= cfg.bracket_expansion;
      if (glo > 0.0) lo = x - width, glo = g(lo);
      if (ghi < 0.0) hi = x + width, ghi = g(hi);
    }
    double best = std::abs(glo) < std::abs(ghi) ? lo : hi;
    double best_r = std::min(std::abs(glo), std::abs(ghi));
    for (int it = 0; it < cfg.max_bisection_iters; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double gm = g(mid);
      if (std::abs(gm) < best_r) best = mid, best_r = std::abs(gm);
      if (best_r <= std::max(cfg.tol, rounding_floor(scale))) return best;
      if (mid <= lo || mid >= hi) break;
      if (gm < 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    g(best);
    if (best_r <= std::max(cfg.tol, rounding_floor(scale))) return best;
    throw SolverDiverged(best_r,
                         static_cast<std::size_t>(newton_iters + cfg.max_bisection_iters));
  }

  void solve_vector(std::span<const double> x, double h, std::span<double> y) {
    const std::size_t d = p.dim;
    std::copy(x.begin(), x.end(), y.begin());
    std::span<double> res(ws.b_);
    double scale = 0.0;
    double rn = residual(x, y, h, res, scale);
    for (int it = 0; it < cfg.max_newton_iters; ++it) {
      if (rn <= std::max(cfg.tol, rounding_floor(scale))) return;
      jacobian(y);
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> dmu(
          ws.jac_.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
      Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d),
                                                      static_cast<Eigen::Index>(d)) -
                            h * dmu;
      Eigen::Map<const Eigen::VectorXd> rv(res.data(), static_cast<Eigen::Index>(d));
      Eigen::VectorXd full = jac.partialPivLu().solve(rv);

      double t = 1.0;
      bool accepted = false;
      std::span<double> trial(ws.c_);
      std::vector<double> trial_res(d);
      for (int halvings = 0; halvings < 40; ++halvings, t *= 0.5) {
        for (std::size_t i = 0; i < d; ++i) trial[i] = y[i] - t * full(static_cast<Eigen::Index>(i));
        double s_try = 0.0;
        const double r_try = residual(x, trial, h, trial_res, s_try);
        if (std::isfinite(r_try) && r_try < rn) {
          std::copy(trial.begin(), trial.end(), y.begin());
          std::copy(trial_res.begin(), trial_res.end(), res.begin());
          rn = r_try;
          scale = s_try;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
    if (rn <= std::max(cfg.tol, rounding_floor(scale))) return;
    throw SolverDiverged(rn, static_cast<std::size_t>(cfg.max_newton_iters));
  }

  // out += sigma(at) dw + nu(at) * dn, in that order.
  void add_noise(std::span<const double> at, std::span<const double> dw, double dn,
                 std::span<double> out) {
    const std::size_t d = p.dim;
    const std::size_t m = p.brownian_dim;
    p.diffusion(at, ws.sigma_);
    p.jump_coeff(at, ws.b_);
    for (std::size_t i = 0; i < d; ++i) {
      double noise = 0.0;
      for (std::size_t j = 0; j < m; ++j) noise += ws.sigma_[i * m + j] * dw[j];
      out[i] += noise;
      out[i] += ws.b_[i] * dn;
    }
  }
};

State implicit_drift_solve(const Problem& p, std::span<const double> x, double h,
                           const ImplicitSolveConfig& cfg) {
  StepWorkspace ws(p);
  State y(p.dim);
  implicit_drift_solve_into(p, x, h, cfg, ws, y);
  return y;
}

void implicit_drift_solve_into(const Problem& p, std::span<const double> x, double h,
                               const ImplicitSolveConfig& cfg, StepWorkspace& ws,
                               std::span<double> y) {
  StepKernel{p, ws, cfg}.solve(x, h, y);
}

double implicit_residual(const Problem& p, std::span<const double> x, std::span<const double> y,
                         double h) {
  std::vector<double> mu(p.dim);
  p.drift(y, mu);
  double s = 0.0;
  for (std::size_t i = 0; i < p.dim; ++i) {
    const double r = y[i] - h * mu[i] - x[i];
    s += r * r;
  }
  return std::sqrt(s);
}

void step_into(const Problem& p, SchemeKind kind, std::span<const double> y, double h,
               std::span<const double> dw, std::uint32_t dp, const SchemeConfig& cfg,
               StepWorkspace& ws, std::span<double> out) {
  StepKernel k{p, ws, cfg.solver};
  const std::size_t d = p.dim;
  const double dn = static_cast<double>(dp) - p.intensity * h;

  switch (kind) {
    case SchemeKind::Euler: {
      p.drift(y, ws.a_);
      for (std::size_t i = 0; i < d; ++i) out[i] = y[i] + ws.a_[i] * h;
      k.add_noise(y, dw, dn, out);
      break;
    }
    case SchemeKind::TamedEuler: {
      p.drift(y, ws.a_);
      const double factor = h / (1.0 + h * norm2(ws.a_));
      for (std::size_t i = 0; i < d; ++i) out[i] = y[i] + ws.a_[i] * factor;
      k.add_noise(y, dw, dn, out);
      break;
    }
    case SchemeKind::SSBE: {
      std::span<double> z(ws.delta_);
      k.solve(y, h, z);
      for (std::size_t i = 0; i < d; ++i) out[i] = z[i];
      k.add_noise(z, dw, dn, out);
      break;
    }
    case SchemeKind::BE: {
      std::span<double> target(ws.delta_);
      for (std::size_t i = 0; i < d; ++i) target[i] = y[i];
      k.add_noise(y, dw, dn, target);
      k.solve(target, h, out);
      break;
    }
  }

  const double bound = is_implicit(kind) ? std::numeric_limits<double>::infinity()
                                         : cfg.explosion_bound;
  for (std::size_t i = 0; i < d; ++i) {
    if (!std::isfinite(out[i]) || std::abs(out[i]) > bound) throw PathExploded(out[i], 0);
  }
}

State step(const Problem& p, SchemeKind kind, std::span<const double> y, double h,
           std::span<const double> dw, std::uint32_t dp, const SchemeConfig& cfg) {
  if (!(h > 0.0)) throw std::invalid_argument("step: h must be > 0");
  if (y.size() != p.dim || dw.size() != p.brownian_dim)
    throw std::invalid_argument("step: state or increment has the wrong dimension");
  StepWorkspace ws(p);
  State out(p.dim);
  step_into(p, kind, y, h, dw, dp, cfg, ws, out);
  return out;
}

Path::Path(std::size_t dim, std::size_t n_states, double t0, double h)
    : dim_(dim), t0_(t0), h_(h), data_(dim * n_states) {}

std::vector<double> Path::times() const {
  std::vector<double> t(size());
  for (std::size_t n = 0; n < t.size(); ++n) t[n] = time(n);
  return t;
}

Path Path::from_scalars(std::span<const double> xs, double t0, double h) {
  Path path(1, xs.size(), t0, h);
  std::copy(xs.begin(), xs.end(), path.data_.begin());
  return path;
}

Path simulate_path(const Problem& p, SchemeKind kind, const NoiseGrid& g,
                   const SchemeConfig& cfg) {
  if (g.brownian_dim != p.brownian_dim)
    throw std::invalid_argument("simulate_path: grid and problem disagree on brownian_dim");
  const double span_grid = g.h * static_cast<double>(g.n_steps);
  if (std::abs(span_grid - p.horizon()) > 4.0 * kEps * std::abs(p.horizon()))
    throw std::invalid_argument("simulate_path: grid and problem disagree on T - t0");

  Path path(p.dim, g.n_steps + 1, p.t0, g.h);
  std::copy(p.x0.begin(), p.x0.end(), path[0].begin());
  StepWorkspace ws(p);
  for (std::size_t n = 0; n < g.n_steps; ++n) {
    try {
      step_into(p, kind, path[n], g.h, g.dw(n), g.dP[n], cfg, ws, path[n + 1]);
    } catch (SimulationError& e) {
      e.annotate_step(n);
      throw;
    }
  }
  return path;
}

}  // namespace jumpmlmc
