#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bopt/linesearch.hpp"
#include "bopt/problems.hpp"
#include "bopt/subproblem.hpp"
#include "bopt/types.hpp"

namespace bopt {

enum class Method { AbpgVmaw, Abpg, Pg, Pgl, Bpg };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::AbpgVmaw: return "abpg_vmaw";
    case Method::Abpg: return "abpg";
    case Method::Pg: return "pg";
    case Method::Pgl: return "pgl";
    case Method::Bpg: return "bpg";
  }
  return "?";
}

inline Method method_from_name(const std::string& s) {
  if (s == "abpg_vmaw") return Method::AbpgVmaw;
  if (s == "abpg") return Method::Abpg;
  if (s == "pg") return Method::Pg;
  if (s == "pgl") return Method::Pgl;
  if (s == "bpg") return Method::Bpg;
  throw ConfigError("unknown solver '" + s + "'");
}

struct SolverConfig {
  Method method = Method::AbpgVmaw;
  std::optional<double> lambda;  ///< defaults to 0.99/L (1/L for pg and pgl)
  double c1 = 0.99;
  double c2 = 0.999;
  double mu = 0.9;
  double eta = 2.0;
  double delta = 0.9;    ///< abpg backtracking factor
  double shrink = 0.9;   ///< pgl descent-lemma backtracking factor
  int max_iters = 1000;
  double stop_tol = 1e-8;
  bool diagnostics = false;
  int max_bracket = 200;
  int max_bisect = 60;
};

/// One trace row. Row 0 is the initial point, recorded before any step; row
/// k >= 1 carries the state x^k together with the statistics of the step
/// that produced it.
struct TraceRecord {
  int iter = 0;
  double obj = 0.0;
  std::optional<double> acc;  ///< ||x^k - x*||, present only with ground truth
  double step_t = 0.0;
  double lambda_used = 0.0;
  int ls_evals = 0;
  double dk_norm = 0.0;
  double xdiff = 0.0;
  std::uint64_t wall_ns = 0;
};

struct SolveOutcome {
  Vector x_final;
  int iterations = 0;
  bool converged = false;
  std::vector<TraceRecord> trace;
  int diagnostics_violations = 0;  ///< failed inequality checks (diagnostics mode)
  int ls_fallbacks = 0;            ///< line searches that hit an iteration cap
  double stationarity_initial = std::numeric_limits<double>::quiet_NaN();
  double stationarity_final = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline void validate(const SolverConfig& cfg) {
  if (!(cfg.c1 > 0.0 && cfg.c1 < cfg.c2 && cfg.c2 < 1.0))
    throw ConfigError("solver config requires 0 < c1 < c2 < 1");
  if (!(cfg.mu > 0.0 && cfg.mu < 1.0 && cfg.eta > 1.0))
    throw ConfigError("solver config requires 0 < mu < 1 < eta");
  if (cfg.lambda && !(*cfg.lambda > 0.0))
    throw ConfigError("solver config requires lambda > 0");
  if (cfg.max_iters < 0) throw ConfigError("max_iters must be nonnegative");
}

inline double resolve_lambda(const Problem& prob, const SolverConfig& cfg, double factor) {
  if (cfg.lambda) return *cfg.lambda;
  if (!prob.smad_L) throw ConfigError("no lambda given and problem carries no smad L");
  return factor / *prob.smad_L;
}

class TraceBuilder {
 public:
  TraceBuilder(SolveOutcome& out, const Vector* x_star, double lambda)
      : out_(out), x_star_(x_star), lambda_(lambda), start_(std::chrono::steady_clock::now()) {}

  void record(int iter, double obj, const Vector& x, double step_t, int ls_evals,
              double dk_norm, double xdiff) {
    TraceRecord row;
    row.iter = iter;
    row.obj = obj;
    if (x_star_) row.acc = (x - *x_star_).norm();
    row.step_t = step_t;
    row.lambda_used = lambda_;
    row.ls_evals = ls_evals;
    row.dk_norm = dk_norm;
    row.xdiff = xdiff;
    row.wall_ns = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::steady_clock::now() - start_)
            .count());
    out_.trace.push_back(row);
  }

  void set_lambda(double lambda) { lambda_ = lambda; }

 private:
  SolveOutcome& out_;
  const Vector* x_star_;
  double lambda_;
  std::chrono::steady_clock::time_point start_;
};

inline double stationarity(const Problem& prob, const Vector& x) {
  try {
    return (prob.f_grad(x) + prob.g_subgrad_at(x)).norm();
  } catch (const DomainError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

/// Lift coordinates that landed on (or underflowed toward) the boundary
/// back into the interior of dom phi so the next Hessian evaluation stays
/// finite: 1/x overflows for x below ~1e-308. Only kernels with an
/// orthant-interior domain need this; the offset is far below every other
/// scale in the iteration.
inline constexpr double kEpsPos = 1e-12;

inline void enforce_interior(const Problem& prob, Vector& x) {
  if (prob.feasible_set != FeasibleSet::NonnegOrthant || !prob.kernel) return;
  if (!prob.kernel->interior_contains(x) || x.minCoeff() < kEpsPos) x = x.cwiseMax(kEpsPos);
}

/// Shared driver for ABPG-VMAW and ABPG: subproblem direction, line search,
/// then either the min-of-two update (vmaw) or x + t d (abpg).
inline SolveOutcome solve_abpg_family(const Problem& prob, Vector x, const SolverConfig& cfg,
                                      const Vector* x_star, bool vmaw) {
  validate(cfg);
  if (!prob.kernel) throw ConfigError("abpg solvers require a kernel");
  const Kernel& kernel = *prob.kernel;
  const double lambda = resolve_lambda(prob, cfg, 0.99);

  SolveOutcome out;
  TraceBuilder trace(out, x_star, lambda);
  double psi_x = prob.psi(x);
  if (!std::isfinite(psi_x)) throw DomainError("x0 infeasible");
  trace.record(0, psi_x, x, 0.0, 0, 0.0, 0.0);
  out.stationarity_initial = stationarity(prob, x);

  const ObjectiveFn psi_at = [&prob](const Vector& z) { return prob.psi(z); };
  const GradientFn grad_at = [&prob](const Vector& z) { return prob.f_grad(z); };

  int k = 0;
  while (k < cfg.max_iters) {
    Vector grad;
    try {
      grad = prob.f_grad(x);
    } catch (const DomainError& e) {
      throw DomainError("iteration " + std::to_string(k) + ": " + e.what(), e.coordinate());
    }
    const Vector xi = prob.g_subgrad_at(x);

    MappingRequest req;
    req.x = x;
    req.grad = grad;
    req.lambda = lambda;
    req.hess_diag = kernel.hess_diag(x, &req.clamped);
    req.g_spec = prob.g_spec;
    const Vector y = approx_prox(req);
    const Vector d = y - x;
    const double dk_norm = d.norm();
    const double dir_deriv = (grad + xi).dot(d);
    if (dk_norm == 0.0 || dir_deriv == 0.0) {
      out.converged = true;
      break;
    }

    const double quad = (req.hess_diag.array() * d.array().square()).sum();
    const double g_gap = prob.g_value(y) - prob.g_value(x);

    if (cfg.diagnostics) {
      // Search direction property: <grad f + xi, d> <= <grad f, d> + g(x+d) - g(x)
      //                            <= -quad/lambda <= 0, strict when d != 0.
      const double mid = grad.dot(d) + g_gap;
      const double upper = -quad / lambda;
      if (!(dir_deriv <= mid + 1e-10) || !(mid <= upper + 1e-10) || !(upper <= 0.0) ||
          !(dir_deriv < 0.0))
        ++out.diagnostics_violations;
    }

    LineSearchContext ctx;
    ctx.x = x;
    ctx.d = d;
    ctx.psi_x = psi_x;
    ctx.grad_fx = grad;
    ctx.xi = xi;
    ctx.quad_term = quad;
    ctx.g_gap = g_gap;
    ctx.lambda = lambda;
    ctx.c1 = cfg.c1;
    ctx.c2 = cfg.c2;

    const LineSearchResult ls =
        vmaw ? vmaw_search(ctx, psi_at, grad_at, cfg.mu, cfg.eta, cfg.max_bracket,
                           cfg.max_bisect)
             : armijo_backtrack(ctx, psi_at, cfg.delta);
    if (!ls.accepted()) ++out.ls_fallbacks;
    const double t = ls.t;

    Vector x_next;
    double psi_next;
    const Vector x_ls = x + t * d;
    if (vmaw) {
      const double psi_y = prob.psi(y);
      const double psi_ls = prob.psi(x_ls);
      if (psi_y < psi_ls) {  // ties take the line-search point
        x_next = y;
        psi_next = psi_y;
      } else {
        x_next = x_ls;
        psi_next = psi_ls;
      }
    } else {
      x_next = x_ls;
      psi_next = prob.psi(x_ls);
    }

    if (cfg.diagnostics) {
      if (ls.accepted()) {
        // Re-verify the accepted step against both conditions.
        if (!(eval_A(ctx, t, psi_at) < 0.0)) ++out.diagnostics_violations;
        if (vmaw) {
          try {
            if (!(eval_W(ctx, t, grad_at) > 0.0)) ++out.diagnostics_violations;
          } catch (const DomainError&) {
            ++out.diagnostics_violations;
          }
        }
        // Sufficient decrease property.
        if (!(psi_next - psi_x <= -(cfg.c1 * t / (2.0 * lambda)) * quad + 1e-10))
          ++out.diagnostics_violations;
      }
      if (!contains(prob.feasible_set, x_next)) ++out.diagnostics_violations;
    }

    enforce_interior(prob, x_next);
    const double xdiff = (x_next - x).norm();
    x = std::move(x_next);
    psi_x = psi_next;
    ++k;
    trace.record(k, psi_x, x, t, ls.a_evals + ls.w_evals, dk_norm, xdiff);
    if (xdiff <= cfg.stop_tol) {
      out.converged = true;
      break;
    }
  }

  out.iterations = k;
  out.stationarity_final = stationarity(prob, x);
  out.x_final = std::move(x);
  return out;
}

/// Euclidean proximal step of g at x - lambda * grad (identity metric).
inline Vector euclidean_prox_step(const Problem& prob, const Vector& x, const Vector& grad,
                                  double lambda) {
  MappingRequest req;
  req.x = x;
  req.grad = grad;
  req.lambda = lambda;
  req.hess_diag = Vector::Ones(x.size());
  req.g_spec = prob.g_spec;
  return approx_prox(req);
}

inline SolveOutcome solve_pg_family(const Problem& prob, Vector x, const SolverConfig& cfg,
                                    const Vector* x_star, bool with_linesearch) {
  validate(cfg);
  const double lambda0 = resolve_lambda(prob, cfg, 1.0);

  SolveOutcome out;
  TraceBuilder trace(out, x_star, lambda0);
  double psi_x = prob.psi(x);
  if (!std::isfinite(psi_x)) throw DomainError("x0 infeasible");
  trace.record(0, psi_x, x, 0.0, 0, 0.0, 0.0);
  out.stationarity_initial = stationarity(prob, x);

  int k = 0;
  while (k < cfg.max_iters) {
    Vector grad;
    try {
      grad = prob.f_grad(x);
    } catch (const DomainError& e) {
      throw DomainError("iteration " + std::to_string(k) + ": " + e.what(), e.coordinate());
    }

    Vector x_next;
    double lambda_k = lambda0;
    int evals = 0;
    if (with_linesearch) {
      const ObjectiveFn f_at = [&prob](const Vector& z) { return prob.f_value(z); };
      DescentBacktrackResult bt = descent_lemma_backtrack(
          f_at,
          [&](double lam) { return euclidean_prox_step(prob, x, grad, lam); },
          x, grad, lambda0, cfg.shrink);
      if (bt.flagged) ++out.ls_fallbacks;
      lambda_k = bt.lambda;
      evals = bt.evals;
      x_next = std::move(bt.y);
    } else {
      x_next = euclidean_prox_step(prob, x, grad, lambda0);
    }

    const double xdiff = (x_next - x).norm();
    const double dk_norm = xdiff;
    x = std::move(x_next);
    psi_x = prob.psi(x);
    ++k;
    trace.set_lambda(lambda_k);
    trace.record(k, psi_x, x, 1.0, evals, dk_norm, xdiff);
    if (xdiff <= cfg.stop_tol) {
      out.converged = true;
      break;
    }
  }

  out.iterations = k;
  out.stationarity_final = stationarity(prob, x);
  out.x_final = std::move(x);
  return out;
}

}  // namespace detail

/// Algorithm driver: subproblem point y^k, direction d^k = y^k - x^k,
/// variable-metric Armijo-Wolfe step t_k, then x^{k+1} = whichever of y^k
/// and x^k + t_k d^k has the smaller objective.
inline SolveOutcome solve_abpg_vmaw(const Problem& prob, const Vector& x0,
                                    const SolverConfig& cfg, const Vector* x_star = nullptr) {
  return detail::solve_abpg_family(prob, x0, cfg, x_star, /*vmaw=*/true);
}

/// Baseline ABPG: same subproblem, plain backtracking on the sufficient
/// decrease condition, x^{k+1} = x^k + t_k d^k.
inline SolveOutcome solve_abpg(const Problem& prob, const Vector& x0, const SolverConfig& cfg,
                               const Vector* x_star = nullptr) {
  return detail::solve_abpg_family(prob, x0, cfg, x_star, /*vmaw=*/false);
}

/// Euclidean proximal gradient with the constant step 1/L. No monotonicity
/// guarantee here; it is reproduced as the paper's baseline.
inline SolveOutcome solve_pg(const Problem& prob, const Vector& x0, const SolverConfig& cfg,
                             const Vector* x_star = nullptr) {
  return detail::solve_pg_family(prob, x0, cfg, x_star, /*with_linesearch=*/false);
}

/// Euclidean proximal gradient with per-iteration descent-lemma
/// backtracking, restarted from lambda0 = 1/L each iteration.
inline SolveOutcome solve_pgl(const Problem& prob, const Vector& x0, const SolverConfig& cfg,
                              const Vector* x_star = nullptr) {
  return detail::solve_pg_family(prob, x0, cfg, x_star, /*with_linesearch=*/true);
}

/// Bregman proximal gradient under the Boltzmann-Shannon kernel; closed form
/// only for the nonnegative KL family. Iterates stay strictly positive.
inline SolveOutcome solve_bpg(const Problem& prob, const Vector& x0, const SolverConfig& cfg,
                              const Vector* x_star = nullptr) {
  detail::validate(cfg);
  if (prob.g_spec.kind != GSpec::Kind::L1PlusNonneg)
    throw ConfigError("solve_bpg: closed-form mapping requires the nonneg_kl family");
  const double lambda = detail::resolve_lambda(prob, cfg, 0.99);

  Vector x = x0;
  SolveOutcome out;
  detail::TraceBuilder trace(out, x_star, lambda);
  double psi_x = prob.psi(x);
  if (!std::isfinite(psi_x) || !(x.array() > 0.0).all())
    throw DomainError("solve_bpg: x0 must be strictly positive");
  trace.record(0, psi_x, x, 0.0, 0, 0.0, 0.0);
  out.stationarity_initial = detail::stationarity(prob, x);

  int k = 0;
  while (k < cfg.max_iters) {
    Vector grad;
    try {
      grad = prob.f_grad(x);
    } catch (const DomainError& e) {
      throw DomainError("iteration " + std::to_string(k) + ": " + e.what(), e.coordinate());
    }
    Vector x_next = bpg_prox_shannon(x, grad, lambda, prob.g_spec.theta);
    if (x_next.minCoeff() < detail::kEpsPos) x_next = x_next.cwiseMax(detail::kEpsPos);
    const double psi_next = prob.psi(x_next);
    if (cfg.diagnostics && !(psi_next <= psi_x + 1e-10)) ++out.diagnostics_violations;

    const double xdiff = (x_next - x).norm();
    x = std::move(x_next);
    psi_x = psi_next;
    ++k;
    trace.record(k, psi_x, x, 1.0, 0, xdiff, xdiff);
    if (xdiff <= cfg.stop_tol) {
      out.converged = true;
      break;
    }
  }

  out.iterations = k;
  out.stationarity_final = detail::stationarity(prob, x);
  out.x_final = std::move(x);
  return out;
}

inline SolveOutcome solve(const Problem& prob, const Vector& x0, const SolverConfig& cfg,
                          const Vector* x_star = nullptr) {
  switch (cfg.method) {
    case Method::AbpgVmaw: return solve_abpg_vmaw(prob, x0, cfg, x_star);
    case Method::Abpg: return solve_abpg(prob, x0, cfg, x_star);
    case Method::Pg: return solve_pg(prob, x0, cfg, x_star);
    case Method::Pgl: return solve_pgl(prob, x0, cfg, x_star);
    case Method::Bpg: return solve_bpg(prob, x0, cfg, x_star);
  }
  throw ConfigError("solve: unknown method");
}

}  // namespace bopt
