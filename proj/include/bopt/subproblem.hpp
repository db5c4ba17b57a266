#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "bopt/types.hpp"

namespace bopt {

/// One evaluation of the approximate Bregman proximal gradient mapping:
/// minimize <grad, u - x> + g(u) + (1 / lambda) * 1/2 sum h_i (u_i - x_i)^2
/// over u. The metric h is the diagonal Hessian of the kernel at x;
/// coordinates whose metric entry was capped are held fixed.
struct MappingRequest {
  Vector x;
  Vector grad;
  double lambda = 1.0;
  Vector hess_diag;
  std::vector<bool> clamped;  ///< optional cap mask from the kernel; may be empty
  GSpec g_spec;
};

inline double soft_threshold(double z, double radius) {
  if (z > radius) return z - radius;
  if (z < -radius) return z + radius;
  return 0.0;  // ties at the kink resolve to exactly 0
}

/// Coordinatewise closed-form minimizer of the mapping subproblem.
inline Vector approx_prox(const MappingRequest& req) {
  if (!(req.lambda > 0.0)) throw ConfigError("approx_prox: lambda must be positive");
  const Index n = req.x.size();
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    const double h = req.hess_diag[i];
    if (!(h > 0.0)) throw MetricError("approx_prox: nonpositive metric entry");
    if (!req.clamped.empty() && req.clamped[static_cast<std::size_t>(i)]) {
      y[i] = req.x[i];
      continue;
    }
    const double step = req.lambda / h;
    switch (req.g_spec.kind) {
      case GSpec::Kind::None:
        y[i] = req.x[i] - step * req.grad[i];
        break;
      case GSpec::Kind::L1:
        y[i] = soft_threshold(req.x[i] - step * req.grad[i], step * req.g_spec.theta);
        break;
      case GSpec::Kind::L1PlusNonneg:
        y[i] = std::max(0.0, req.x[i] - step * (req.grad[i] + req.g_spec.theta));
        break;
    }
  }
  return y;
}

/// Bregman proximal gradient step under the Boltzmann-Shannon kernel:
/// y_i = x_i * exp(-lambda * (grad_i + theta1)), the unique minimizer of
/// <grad, u - x> + theta1 ||u||_1 + (1 / lambda) D_phi0(u, x) over u >= 0.
/// Exponents are clamped to +-700 against overflow; `exp_clamped` reports
/// whether that happened.
inline Vector bpg_prox_shannon(const Vector& x, const Vector& grad, double lambda,
                               double theta1, bool* exp_clamped = nullptr) {
  if (!(lambda > 0.0)) throw ConfigError("bpg_prox_shannon: lambda must be positive");
  if (exp_clamped) *exp_clamped = false;
  Vector y(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) throw DomainError("bpg_prox_shannon: x must be positive", i);
    double e = -lambda * (grad[i] + theta1);
    if (e > 700.0 || e < -700.0) {
      e = e > 0.0 ? 700.0 : -700.0;
      if (exp_clamped) *exp_clamped = true;
    }
    y[i] = x[i] * std::exp(e);
  }
  return y;
}

/// Brute-force audit of approx_prox: per coordinate, scan the separable 1-D
/// subproblem objective on a grid of the given halfwidth and step around
/// y_i (plus the kink u = 0 and the anchor u = x_i) and report the largest
/// amount by which the objective at y exceeds the grid minimum. Enumerates
/// the objective directly; shares nothing with the closed forms.
inline double subproblem_oracle_check(const MappingRequest& req, const Vector& y,
                                      double grid_halfwidth, double grid_step) {
  double worst = 0.0;
  const long steps = static_cast<long>(2.0 * grid_halfwidth / grid_step) + 1;
  for (Index i = 0; i < req.x.size(); ++i) {
    const double xi = req.x[i];
    const double gi = req.grad[i];
    const double hi = req.hess_diag[i];
    const auto objective = [&](double u) {
      double gterm = 0.0;
      switch (req.g_spec.kind) {
        case GSpec::Kind::None:
          break;
        case GSpec::Kind::L1:
          gterm = req.g_spec.theta * std::abs(u);
          break;
        case GSpec::Kind::L1PlusNonneg:
          if (u < 0.0) return kInf;
          gterm = req.g_spec.theta * u;
          break;
      }
      const double du = u - xi;
      return gi * du + gterm + hi / (2.0 * req.lambda) * du * du;
    };
    const double at_y = objective(y[i]);
    double best = std::min(at_y, std::min(objective(0.0), objective(xi)));
    const double lo = y[i] - grid_halfwidth;
    for (long s = 0; s < steps; ++s) best = std::min(best, objective(lo + grid_step * s));
    worst = std::max(worst, at_y - best);
  }
  return worst;
}

}  // namespace bopt
