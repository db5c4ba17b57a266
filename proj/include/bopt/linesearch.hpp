#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include "bopt/types.hpp"

namespace bopt {

using ObjectiveFn = std::function<double(const Vector&)>;
using GradientFn = std::function<Vector(const Vector&)>;

/// Everything about the current iterate that the step-size conditions need.
/// quad_term is <hess phi(x) d, d>; g_gap is g(x + d) - g(x), evaluated at
/// the full direction (not at x + t d).
struct LineSearchContext {
  Vector x;
  Vector d;
  double psi_x = 0.0;
  Vector grad_fx;
  Vector xi;
  double quad_term = 0.0;
  double g_gap = 0.0;
  double lambda = 1.0;
  double c1 = 0.99;
  double c2 = 0.999;
};

/// Variable-metric Armijo gap
///   A(t) = Psi(x + t d) + indicator - Psi(x)
///          - c1 t (<grad f(x), d> + g(x+d) - g(x) + quad_term / (2 lambda)).
/// The step is acceptable when A(t) < 0. Infeasible trial points yield +inf.
inline double eval_A(const LineSearchContext& ctx, double t, const ObjectiveFn& psi_at) {
  const double psi_t = psi_at(ctx.x + t * ctx.d);
  if (!std::isfinite(psi_t)) return kInf;
  const double slope =
      ctx.grad_fx.dot(ctx.d) + ctx.g_gap + ctx.quad_term / (2.0 * ctx.lambda);
  return psi_t - ctx.psi_x - ctx.c1 * t * slope;
}

/// Curvature gap W(t) = <grad f(x + t d) + xi, d> - c2 <grad f(x) + xi, d>;
/// the step is large enough when W(t) > 0. Propagates DomainError when
/// grad f is undefined at the trial point.
inline double eval_W(const LineSearchContext& ctx, double t, const GradientFn& grad_f_at) {
  const Vector grad_t = grad_f_at(ctx.x + t * ctx.d);
  return (grad_t + ctx.xi).dot(ctx.d) - ctx.c2 * (ctx.grad_fx + ctx.xi).dot(ctx.d);
}

struct LineSearchResult {
  enum class Status { Accepted, CapHitFallback };

  double t = 0.0;
  int a_evals = 0;
  int w_evals = 0;
  Status status = Status::Accepted;

  bool accepted() const { return status == Status::Accepted; }
};

/// Bracketing + bisection search for a step with A(t) < 0 and W(t) > 0.
///
/// Starting from t = 1, the bracket phase contracts by mu while A >= 0, or
/// expands by eta while A < 0 (stopping at 1e12); bisection then shrinks
/// [alpha, beta] keeping A(alpha) < 0, and returns the first midpoint
/// passing both tests. The loops get iteration caps the underlying procedure
/// does not have: when g dominates the objective no finite Armijo-Wolfe step
/// need exist, so on cap we fall back to the largest trial with A(t) < 0
/// (monotone decrease survives), or mu^max_bracket if none was seen.
/// A trial where grad f is undefined counts as too large: the upper end
/// shrinks onto it.
inline LineSearchResult vmaw_search(const LineSearchContext& ctx, const ObjectiveFn& psi_at,
                                    const GradientFn& grad_f_at, double mu, double eta,
                                    int max_bracket = 200, int max_bisect = 60) {
  if (!(mu > 0.0 && mu < 1.0 && eta > 1.0))
    throw ConfigError("vmaw_search: need 0 < mu < 1 < eta");
  constexpr double kExpansionCap = 1e12;

  LineSearchResult res;
  double best_accept = -1.0;  // largest trial seen with A(t) < 0

  const auto A = [&](double t) {
    ++res.a_evals;
    const double a = eval_A(ctx, t, psi_at);
    if (a < 0.0 && t > best_accept) best_accept = t;
    return a;
  };
  const auto W = [&](double t) -> std::optional<double> {
    ++res.w_evals;
    try {
      return eval_W(ctx, t, grad_f_at);
    } catch (const DomainError&) {
      return std::nullopt;
    }
  };
  const auto fallback = [&]() {
    res.status = LineSearchResult::Status::CapHitFallback;
    res.t = best_accept > 0.0 ? best_accept : std::pow(mu, max_bracket);
    return res;
  };

  double q1 = 1.0;
  double q2 = 1.0;
  double a1 = A(q1);
  int moves = 0;
  if (a1 >= 0.0) {
    while (a1 >= 0.0) {
      if (++moves > max_bracket) return fallback();
      q2 = q1;
      q1 *= mu;
      a1 = A(q1);
    }
  } else {
    while (a1 < 0.0) {
      if (++moves > max_bracket || q1 * eta > kExpansionCap) return fallback();
      q2 = q1;
      q1 *= eta;
      a1 = A(q1);
    }
  }

  double alpha = std::min(q1, q2);
  double beta = std::max(q1, q2);
  double t = 0.5 * (alpha + beta);
  for (int i = 0; i < max_bisect; ++i) {
    if (A(t) >= 0.0) {
      beta = t;
    } else {
      const std::optional<double> w = W(t);
      if (!w.has_value()) {
        beta = t;
      } else if (*w <= 0.0) {
        alpha = t;
      } else {
        res.t = t;
        return res;
      }
    }
    t = 0.5 * (alpha + beta);
  }
  return fallback();
}

/// Backtracking on the plain sufficient decrease condition
///   Psi(x + t d) < Psi(x) + c1 t (<grad f(x), d> + g(x+d) - g(x)),
/// trying t = 1, delta, delta^2, ... and returning the first (largest)
/// success. On cap, returns the smallest feasible trial, flagged.
inline LineSearchResult armijo_backtrack(const LineSearchContext& ctx,
                                         const ObjectiveFn& psi_at, double delta,
                                         int max_iters = 200) {
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("armijo_backtrack: need 0 < delta < 1");
  LineSearchResult res;
  const double slope = ctx.grad_fx.dot(ctx.d) + ctx.g_gap;
  double t = 1.0;
  double smallest_feasible = -1.0;
  for (int i = 0; i < max_iters; ++i) {
    ++res.a_evals;
    const double psi_t = psi_at(ctx.x + t * ctx.d);
    if (std::isfinite(psi_t)) {
      smallest_feasible = t;
      if (psi_t < ctx.psi_x + ctx.c1 * t * slope) {
        res.t = t;
        return res;
      }
    }
    t *= delta;
  }
  res.status = LineSearchResult::Status::CapHitFallback;
  res.t = smallest_feasible > 0.0 ? smallest_feasible : t;
  return res;
}

struct DescentBacktrackResult {
  double lambda = 0.0;
  Vector y;
  int evals = 0;  ///< number of trial step-sizes examined
  bool flagged = false;
};

/// Step-size search on the Euclidean descent lemma: the smallest j >= 0 with
/// lambda = lambda0 * shrink^j such that the prox step y(lambda) satisfies
///   f(y) <= f(x) + <grad, y - x> + ||y - x||^2 / (2 lambda).
/// `prox_step(x - lambda grad)` style evaluation is delegated to the caller
/// through prox_step(lambda). Exceeding max_shrinks returns the last trial,
/// flagged.
inline DescentBacktrackResult descent_lemma_backtrack(
    const ObjectiveFn& f_value, const std::function<Vector(double)>& prox_step,
    const Vector& x, const Vector& grad, double lambda0, double shrink,
    int max_shrinks = 100) {
  if (!(shrink > 0.0 && shrink < 1.0))
    throw ConfigError("descent_lemma_backtrack: need 0 < shrink < 1");
  if (!(lambda0 > 0.0)) throw ConfigError("descent_lemma_backtrack: lambda0 must be positive");
  const double fx = f_value(x);
  double lambda = lambda0;
  DescentBacktrackResult res;
  for (int j = 0;; ++j) {
    Vector y = prox_step(lambda);
    ++res.evals;
    const Vector dy = y - x;
    const double bound = fx + grad.dot(dy) + dy.squaredNorm() / (2.0 * lambda);
    if (f_value(y) <= bound) {
      res.lambda = lambda;
      res.y = std::move(y);
      return res;
    }
    if (j >= max_shrinks) {
      res.lambda = lambda;
      res.y = std::move(y);
      res.flagged = true;
      return res;
    }
    lambda *= shrink;
  }
}

}  // namespace bopt
