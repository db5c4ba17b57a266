#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "bopt/types.hpp"

namespace bopt {

/// A kernel generating distance: a proper convex function, extended-real
/// valued, twice differentiable on the interior of its domain, with a
/// diagonal Hessian. Kernels are immutable after construction and all
/// evaluators are pure, so they may be shared freely across threads.
class Kernel {
 public:
  virtual ~Kernel() = default;

  /// phi(x); +inf outside dom phi.
  virtual double value(const Vector& x) const = 0;

  /// grad phi(x); meaningful only on the interior of dom phi.
  virtual Vector gradient(const Vector& x) const = 0;

  /// Diagonal of hess phi(x). Entries that had to be capped (see
  /// LpPlusQuadratic) mark the corresponding position of `clamped` when it
  /// is non-null; `clamped` is resized and zero-filled on entry.
  virtual Vector hess_diag(const Vector& x, std::vector<bool>* clamped = nullptr) const = 0;

  /// First coordinate excluding x from the interior of dom phi, -1 if none.
  virtual Index interior_violation(const Vector& x) const = 0;

  /// First coordinate excluding x from dom phi (the closure), -1 if none.
  virtual Index domain_violation(const Vector& x) const { return interior_violation(x); }

  bool interior_contains(const Vector& x) const { return interior_violation(x) < 0; }

  /// sigma such that phi is sigma-strongly convex; 0 when unknown.
  virtual double strong_convexity_lb() const { return 0.0; }

  virtual std::string name() const = 0;

 protected:
  static void reset_mask(std::vector<bool>* clamped, Index n) {
    if (clamped) clamped->assign(static_cast<std::size_t>(n), false);
  }
};

/// phi(x) = 1/2 ||x||^2 on all of R^n.
class SquaredEuclidean final : public Kernel {
 public:
  double value(const Vector& x) const override { return 0.5 * x.squaredNorm(); }
  Vector gradient(const Vector& x) const override { return x; }
  Vector hess_diag(const Vector& x, std::vector<bool>* clamped = nullptr) const override {
    reset_mask(clamped, x.size());
    return Vector::Ones(x.size());
  }
  Index interior_violation(const Vector&) const override { return -1; }
  double strong_convexity_lb() const override { return 1.0; }
  std::string name() const override { return "sq_euclid"; }
};

/// Boltzmann-Shannon entropy phi(x) = sum x_i log x_i with 0 log 0 = 0,
/// dom = R^n_+, interior = R^n_++.
class BoltzmannShannon final : public Kernel {
 public:
  double value(const Vector& x) const override {
    double acc = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      if (x[i] < 0.0) return kInf;
      if (x[i] > 0.0) acc += x[i] * std::log(x[i]);
    }
    return acc;
  }
  Vector gradient(const Vector& x) const override {
    return x.array().log() + 1.0;
  }
  Vector hess_diag(const Vector& x, std::vector<bool>* clamped = nullptr) const override {
    reset_mask(clamped, x.size());
    return x.cwiseInverse();
  }
  Index interior_violation(const Vector& x) const override {
    for (Index i = 0; i < x.size(); ++i)
      if (!(x[i] > 0.0)) return i;
    return -1;
  }
  Index domain_violation(const Vector& x) const override {
    for (Index i = 0; i < x.size(); ++i)
      if (x[i] < 0.0) return i;
    return -1;
  }
  std::string name() const override { return "shannon"; }
};

/// Burg entropy phi(x) = -sum log x_i, dom = interior = R^n_++.
class Burg final : public Kernel {
 public:
  double value(const Vector& x) const override {
    double acc = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      if (!(x[i] > 0.0)) return kInf;
      acc -= std::log(x[i]);
    }
    return acc;
  }
  Vector gradient(const Vector& x) const override { return -x.cwiseInverse(); }
  Vector hess_diag(const Vector& x, std::vector<bool>* clamped = nullptr) const override {
    reset_mask(clamped, x.size());
    return x.array().square().inverse();
  }
  Index interior_violation(const Vector& x) const override {
    for (Index i = 0; i < x.size(); ++i)
      if (!(x[i] > 0.0)) return i;
    return -1;
  }
  std::string name() const override { return "burg"; }
};

/// phi(x) = 1/2 ||x||^2 + (1/p) ||x||_p^p on all of R^n, p > 1. C^1
/// everywhere, but for p < 2 the Hessian entries 1 + (p-1)|x_i|^{p-2}
/// diverge at x_i = 0; they are capped at `hess_cap` and flagged. A capped
/// coordinate is treated as frozen by the subproblem, which is the limit
/// behavior of the closed form as the entry grows without bound.
class LpPlusQuadratic final : public Kernel {
 public:
  explicit LpPlusQuadratic(double p, double hess_cap = 1e12) : p_(p), cap_(hess_cap) {
    if (!(p > 1.0)) throw ConfigError("lp_plus_quadratic requires p > 1");
  }

  double value(const Vector& x) const override {
    double acc = 0.0;
    for (Index i = 0; i < x.size(); ++i)
      acc += 0.5 * x[i] * x[i] + std::pow(std::abs(x[i]), p_) / p_;
    return acc;
  }
  Vector gradient(const Vector& x) const override {
    Vector g(x.size());
    for (Index i = 0; i < x.size(); ++i)
      g[i] = x[i] + sgn(x[i]) * std::pow(std::abs(x[i]), p_ - 1.0);
    return g;
  }
  Vector hess_diag(const Vector& x, std::vector<bool>* clamped = nullptr) const override {
    reset_mask(clamped, x.size());
    Vector h(x.size());
    for (Index i = 0; i < x.size(); ++i) {
      const double v = 1.0 + (p_ - 1.0) * std::pow(std::abs(x[i]), p_ - 2.0);
      if (v > cap_ || std::isnan(v)) {
        h[i] = cap_;
        if (clamped) (*clamped)[static_cast<std::size_t>(i)] = true;
      } else {
        h[i] = v;
      }
    }
    return h;
  }
  Index interior_violation(const Vector&) const override { return -1; }
  double strong_convexity_lb() const override { return 1.0; }
  double p() const { return p_; }
  std::string name() const override { return "lp_quad(p=" + std::to_string(p_) + ")"; }

 private:
  double p_;
  double cap_;
};

/// phi(x) = sum x_i log x_i + 1/2 ||x||^2, dom = R^n_+, interior = R^n_++.
class EntropyPlusQuadratic final : public Kernel {
 public:
  double value(const Vector& x) const override {
    double acc = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      if (x[i] < 0.0) return kInf;
      acc += 0.5 * x[i] * x[i];
      if (x[i] > 0.0) acc += x[i] * std::log(x[i]);
    }
    return acc;
  }
  Vector gradient(const Vector& x) const override {
    return x.array().log() + 1.0 + x.array();
  }
  Vector hess_diag(const Vector& x, std::vector<bool>* clamped = nullptr) const override {
    reset_mask(clamped, x.size());
    return (x.array().inverse() + 1.0).matrix();
  }
  Index interior_violation(const Vector& x) const override {
    for (Index i = 0; i < x.size(); ++i)
      if (!(x[i] > 0.0)) return i;
    return -1;
  }
  Index domain_violation(const Vector& x) const override {
    for (Index i = 0; i < x.size(); ++i)
      if (x[i] < 0.0) return i;
    return -1;
  }
  double strong_convexity_lb() const override { return 1.0; }
  std::string name() const override { return "shannon_quad"; }
};

/// Bregman distance D_phi(x, y) = phi(x) - phi(y) - <grad phi(y), x - y>.
/// Nonnegative for convex phi; tiny negative roundoff (above -1e-12) is
/// floored to zero.
inline double bregman_distance(const Kernel& kernel, const Vector& x, const Vector& y) {
  const Index iy = kernel.interior_violation(y);
  if (iy >= 0) throw DomainError("bregman_distance: y not in interior of dom phi", iy);
  const Index ix = kernel.domain_violation(x);
  if (ix >= 0) throw DomainError("bregman_distance: x not in dom phi", ix);
  const double raw = kernel.value(x) - kernel.value(y) - kernel.gradient(y).dot(x - y);
  return (raw < 0.0 && raw >= -1e-12) ? 0.0 : raw;
}

/// Approximate Bregman distance: the second-order surrogate
/// 1/2 <hess phi(x) (u - x), u - x> with the diagonal Hessian at x. The
/// quadratic form is evaluated regardless of whether u lies in dom phi;
/// feasibility of u is the mapping layer's concern.
inline double approx_bregman_distance(const Kernel& kernel, const Vector& u, const Vector& x) {
  const Index ix = kernel.interior_violation(x);
  if (ix >= 0) throw DomainError("approx_bregman_distance: x not in interior of dom phi", ix);
  const Vector h = kernel.hess_diag(x);
  return 0.5 * (h.array() * (u - x).array().square()).sum();
}

/// Central finite-difference check of grad phi at an interior point with
/// margin > h in every coordinate. Returns the max over coordinates of
/// |difference - gradient| / (1 + |gradient|), or +inf if a probe escapes
/// the domain.
inline double kernel_grad_check(const Kernel& kernel, const Vector& x, double h) {
  const Vector g = kernel.gradient(x);
  Vector probe = x;
  double worst = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double fp = kernel.value(probe);
    probe[i] = x[i] - h;
    const double fm = kernel.value(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) return kInf;
    const double diff = (fp - fm) / (2.0 * h);
    worst = std::max(worst, std::abs(diff - g[i]) / (1.0 + std::abs(g[i])));
  }
  return worst;
}

/// Kernel lookup by the names used in harness configs: "sq_euclid",
/// "shannon", "burg", "lp_quad(p=...)", "shannon_quad".
inline std::shared_ptr<Kernel> make_kernel(const std::string& spec) {
  if (spec == "sq_euclid") return std::make_shared<SquaredEuclidean>();
  if (spec == "shannon") return std::make_shared<BoltzmannShannon>();
  if (spec == "burg") return std::make_shared<Burg>();
  if (spec == "shannon_quad") return std::make_shared<EntropyPlusQuadratic>();
  if (spec.rfind("lp_quad(p=", 0) == 0 && spec.back() == ')') {
    const std::string num = spec.substr(10, spec.size() - 11);
    std::size_t pos = 0;
    double p = 0.0;
    try {
      p = std::stod(num, &pos);
    } catch (const std::exception&) {
      throw ConfigError("make_kernel: bad p in '" + spec + "'");
    }
    if (pos != num.size()) throw ConfigError("make_kernel: bad p in '" + spec + "'");
    return std::make_shared<LpPlusQuadratic>(p);
  }
  throw ConfigError("make_kernel: unknown kernel '" + spec + "'");
}

}  // namespace bopt
